#include "gesticulate/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw SchemaError(path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t chunk_len = read_u32(hdr + 4);
    const unsigned char* body = hdr + 8;
    if (pos + 8 + chunk_len > bytes.size())
      throw SchemaError(path.string() + ": truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw SchemaError(path.string() + ": fmt chunk too short");
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && chunk_len >= 40)
        format = read_u16(body + 24);  // first two bytes of the sub-format GUID
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw SchemaError(path.string() + ": missing fmt or data chunk");
  if (channels == 0 || rate == 0) throw SchemaError(path.string() + ": bad fmt fields");

  std::size_t bytes_per_sample = bits / 8;
  if (bytes_per_sample == 0) throw SchemaError(path.string() + ": zero sample width");
  std::size_t total = data_len / (bytes_per_sample * channels);

  WavData wav;
  wav.sample_rate = static_cast<int>(rate);
  wav.samples.resize(total);

  auto decode = [&](std::size_t frame, std::size_t ch) -> double {
    const unsigned char* p = data + (frame * channels + ch) * bytes_per_sample;
    if (format == kFormatPcm) {
      if (bits == 16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return v / 32768.0;
      }
      if (bits == 24) {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) v |= ~0xFFFFFF;
        return v / 8388608.0;
      }
      if (bits == 32) {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v / 2147483648.0;
      }
    } else if (format == kFormatFloat) {
      if (bits == 32) {
        float v;
        std::memcpy(&v, p, 4);
        return v;
      }
      if (bits == 64) {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
    }
    throw SchemaError(path.string() + ": unsupported sample format (" + std::to_string(format) +
                      "/" + std::to_string(bits) + " bit)");
  };

  for (std::size_t i = 0; i < total; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < channels; ++ch) acc += decode(i, ch);
    wav.samples[i] = acc / channels;
  }
  return wav;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate) {
  if (sample_rate <= 0) throw ConfigError("write_wav: sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());

  std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  std::uint32_t riff_len = 36 + data_len;
  auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };

  out.write("RIFF", 4);
  u32(riff_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(kFormatPcm);
  u16(1);  // mono
  u32(static_cast<std::uint32_t>(sample_rate));
  u32(static_cast<std::uint32_t>(sample_rate * 2));
  u16(2);
  u16(16);
  out.write("data", 4);
  u32(data_len);
  for (double s : samples) {
    // Same 1/32768 scale the reader uses, so a round trip only quantizes.
    long v = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
    auto q = static_cast<std::int16_t>(std::clamp<long>(v, -32768, 32767));
    out.write(reinterpret_cast<const char*>(&q), 2);
  }
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace gesticulate
