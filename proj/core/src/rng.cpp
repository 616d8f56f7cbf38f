#include "gesticulate/rng.hpp"

#include <cmath>
#include <sstream>

#include "gesticulate/errors.hpp"

namespace gesticulate {

double rand_normal(std::mt19937_64& g) {
  // Box-Muller; the log argument is kept away from zero.
  double u1 = 1.0 - rand_unit(g);
  double u2 = rand_unit(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string rng_state_to_string(const std::mt19937_64& g) {
  std::ostringstream out;
  out << g;
  return out.str();
}

std::mt19937_64 rng_state_from_string(const std::string& s) {
  std::mt19937_64 g;
  std::istringstream in(s);
  in >> g;
  if (!in) throw SchemaError("invalid RNG state string");
  return g;
}

}  // namespace gesticulate
