#include "gesticulate/audio_features.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct plans is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_edges_hz(int n_mels, double fmin_hz, double fmax_hz) {
  if (n_mels < 1) throw ConfigError("mel filterbank needs at least one filter");
  if (!(fmax_hz > fmin_hz)) throw ConfigError("mel range is empty");
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  double lo = hz_to_mel(fmin_hz), hi = hz_to_mel(fmax_hz);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
  return edges;
}

FeatureTrack extract_mel(std::span<const double> samples, int sample_rate, const MelConfig& cfg) {
  if (sample_rate <= 0) throw ConfigError("extract_mel: sample rate must be positive");
  if (cfg.n_mels <= 0 || cfg.window_s <= 0 || cfg.hop_s <= 0)
    throw ConfigError("extract_mel: bad mel config");

  FeatureTrack track;
  track.fps = 1.0 / cfg.hop_s;
  int hop = static_cast<int>(std::lround(sample_rate * cfg.hop_s));
  int win = static_cast<int>(std::lround(sample_rate * cfg.window_s));
  if (hop <= 0 || win <= 0) throw ConfigError("extract_mel: window shorter than one sample");

  int n_frames = static_cast<int>(samples.size()) / hop;  // floor(duration / hop)
  track.frames.resize(n_frames, cfg.n_mels);
  if (n_frames == 0) return track;

  int n_fft = next_pow2(win);
  int n_bins = n_fft / 2 + 1;

  double fmax = cfg.fmax_hz > 0 ? cfg.fmax_hz : sample_rate / 2.0;
  std::vector<double> edges = mel_edges_hz(cfg.n_mels, cfg.fmin_hz, fmax);

  // Triangular filters sampled at the FFT bin frequencies, peak 1.
  Eigen::MatrixXd filters = Eigen::MatrixXd::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    double left = edges[static_cast<std::size_t>(m)];
    double center = edges[static_cast<std::size_t>(m) + 1];
    double right = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      double f = static_cast<double>(k) * sample_rate / n_fft;
      if (f <= left || f >= right) continue;
      filters(m, k) = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
    }
  }

  std::vector<double> hann(static_cast<std::size_t>(win));
  for (int i = 0; i < win; ++i)
    hann[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / win));

  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    in = fftw_alloc_real(static_cast<std::size_t>(n_fft));
    out = fftw_alloc_complex(static_cast<std::size_t>(n_bins));
    plan = fftw_plan_dft_r2c_1d(n_fft, in, out, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericError("extract_mel: FFT planning failed");

  Eigen::VectorXd power(n_bins);
  for (int t = 0; t < n_frames; ++t) {
    std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(hop);
    for (int i = 0; i < n_fft; ++i) {
      std::size_t idx = start + static_cast<std::size_t>(i);
      double s = (i < win && idx < samples.size()) ? samples[idx] * hann[static_cast<std::size_t>(i)]
                                                   : 0.0;
      in[i] = s;
    }
    fftw_execute(plan);
    for (int k = 0; k < n_bins; ++k)
      power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];

    Eigen::VectorXd mel = filters * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      track.frames(t, m) = std::log(std::max(mel[m], cfg.power_floor));
  }

  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }

  if (!track.frames.allFinite()) throw NumericError("extract_mel: non-finite feature values");
  return track;
}

}  // namespace gesticulate
