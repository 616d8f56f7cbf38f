#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace gesticulate {

// Forward differences with track shortening: velocity has T-1 rows,
// acceleration T-2, jerk T-3.  Positions are T x (3 * joints) in cm, so the
// tracks are cm/s, cm/s^2, cm/s^3.  Throws ShapeError when T < 4.
struct DerivativeTracks {
  Eigen::MatrixXd velocity, acceleration, jerk;
};
DerivativeTracks finite_differences(const Eigen::MatrixXd& positions, double fps);

// Mean of per-joint Euclidean magnitudes over all rows and selected joints.
double mean_magnitude(const Eigen::MatrixXd& track, const std::vector<int>& joints);

// Per-sequence scores.  RMSE (cm) is the root of the mean squared per-joint
// position error against ground truth, when available.
struct SequenceMetrics {
  double accel = 0.0;
  double jerk = 0.0;
  std::optional<double> rmse;
};
SequenceMetrics sequence_metrics(const Eigen::MatrixXd& positions,
                                 const Eigen::MatrixXd* ground_truth, double fps,
                                 const std::vector<int>& stat_joints);

// Mean and sample standard deviation across sequences (std 0 for a single
// sequence).
struct AggregateMetrics {
  double mean_accel = 0.0, std_accel = 0.0;
  double mean_jerk = 0.0, std_jerk = 0.0;
  double mean_rmse = 0.0, std_rmse = 0.0;
  bool has_rmse = false;
  int sequences = 0;
};
AggregateMetrics aggregate_metrics(const std::vector<SequenceMetrics>& per_sequence);

// Relative frequency of per-frame speeds of the listed joints, bins
// [i*width, (i+1)*width).  Frequencies sum to 1 when any frames exist.
struct VelocityHistogram {
  std::vector<double> frequency;
  double bin_width = 1.0;
};
VelocityHistogram velocity_histogram(const std::vector<Eigen::MatrixXd>& position_tracks,
                                     const std::vector<int>& joints, double fps,
                                     double bin_width = 1.0);

struct SystemReport {
  std::string name;
  AggregateMetrics metrics;
  VelocityHistogram histogram;
};

// Plain-text comparison table, one row per system.
std::string format_report_table(const std::vector<SystemReport>& systems);
// CSV: system,mean_accel,std_accel,mean_jerk,std_jerk,rmse,std_rmse
// (empty RMSE cells for systems without ground truth distance).
std::string format_report_csv(const std::vector<SystemReport>& systems);
// CSV: bin_low,frequency
std::string format_histogram_csv(const VelocityHistogram& hist);

}  // namespace gesticulate
