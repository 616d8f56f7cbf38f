#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gesticulate {

struct WavData {
  std::vector<double> samples;  // mono, in [-1, 1] for integer sources
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file.  Accepts PCM 16/24/32-bit and IEEE float 32/64;
// multi-channel input is downmixed by averaging.  Throws SchemaError on
// malformed headers and IoError when the file cannot be opened.
WavData read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM.  Samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate);

}  // namespace gesticulate
