#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gesticulate {

// Uniform in [0, 1) with an explicit bit mapping (53 high bits), so streams
// are identical across standard libraries.
inline double rand_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double rand_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(g);
}

// Standard normal via Box-Muller on the explicit uniform mapping.
double rand_normal(std::mt19937_64& g);

std::string rng_state_to_string(const std::mt19937_64& g);
std::mt19937_64 rng_state_from_string(const std::string& s);

}  // namespace gesticulate
