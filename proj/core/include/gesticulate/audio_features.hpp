#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace gesticulate {

struct MelConfig {
  int n_mels = 64;
  double window_s = 0.1;
  double hop_s = 0.05;     // 20 fps
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;    // 0 means Nyquist
  double power_floor = 1e-10;
};

// Time-aligned feature rows, one per 20 fps frame.
struct FeatureTrack {
  Eigen::MatrixXd frames;  // T x D
  double fps = 20.0;

  int length() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Center frequencies in Hz of the n_mels + 2 filterbank edge points spread
// uniformly on the mel scale over [fmin, fmax].
std::vector<double> mel_edges_hz(int n_mels, double fmin_hz, double fmax_hz);

// Log-power mel spectrogram: Hann-windowed frames of window_s seconds every
// hop_s seconds, magnitude-squared spectrum folded through triangular mel
// filters, clamped at power_floor, natural log.  Produces exactly
// floor(duration / hop_s) rows; windows running past the end are
// zero-padded.  An empty waveform yields an empty track.
FeatureTrack extract_mel(std::span<const double> samples, int sample_rate,
                         const MelConfig& cfg = {});

}  // namespace gesticulate
