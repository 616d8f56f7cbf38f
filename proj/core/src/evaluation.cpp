#include "gesticulate/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

Eigen::MatrixXd diff_rows(const Eigen::MatrixXd& m, double fps) {
  const Eigen::Index T = m.rows();
  return (m.bottomRows(T - 1) - m.topRows(T - 1)) * fps;
}

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

DerivativeTracks finite_differences(const Eigen::MatrixXd& positions, double fps) {
  if (positions.rows() < 4)
    throw ShapeError("finite_differences: need at least 4 frames for jerk, got " +
                     std::to_string(positions.rows()));
  if (positions.cols() % 3 != 0)
    throw ShapeError("finite_differences: columns must be per-joint xyz triples");
  if (fps <= 0) throw ConfigError("finite_differences: fps must be positive");

  DerivativeTracks tracks;
  tracks.velocity = diff_rows(positions, fps);
  tracks.acceleration = diff_rows(tracks.velocity, fps);
  tracks.jerk = diff_rows(tracks.acceleration, fps);
  return tracks;
}

double mean_magnitude(const Eigen::MatrixXd& track, const std::vector<int>& joints) {
  if (joints.empty() || track.rows() == 0) return 0.0;
  double acc = 0.0;
  for (int j : joints) {
    if (3 * j + 2 >= track.cols())
      throw ShapeError("mean_magnitude: joint index " + std::to_string(j) + " out of range");
    acc += track.middleCols(3 * j, 3).rowwise().norm().sum();
  }
  return acc / (static_cast<double>(track.rows()) * static_cast<double>(joints.size()));
}

SequenceMetrics sequence_metrics(const Eigen::MatrixXd& positions,
                                 const Eigen::MatrixXd* ground_truth, double fps,
                                 const std::vector<int>& stat_joints) {
  DerivativeTracks d = finite_differences(positions, fps);
  SequenceMetrics m;
  m.accel = mean_magnitude(d.acceleration, stat_joints);
  m.jerk = mean_magnitude(d.jerk, stat_joints);
  if (ground_truth) {
    if (ground_truth->rows() != positions.rows() || ground_truth->cols() != positions.cols())
      throw ShapeError("sequence_metrics: ground truth shape differs from generated motion");
    double acc = 0.0;
    for (int j : stat_joints)
      acc += (positions.middleCols(3 * j, 3) - ground_truth->middleCols(3 * j, 3))
                 .rowwise()
                 .squaredNorm()
                 .sum();
    m.rmse = std::sqrt(acc / (static_cast<double>(positions.rows()) *
                              static_cast<double>(stat_joints.size())));
  }
  return m;
}

AggregateMetrics aggregate_metrics(const std::vector<SequenceMetrics>& per_sequence) {
  AggregateMetrics agg;
  agg.sequences = static_cast<int>(per_sequence.size());
  if (per_sequence.empty()) return agg;

  auto mean_std = [&](auto getter) -> std::pair<double, double> {
    double mean = 0.0;
    for (const auto& s : per_sequence) mean += getter(s);
    mean /= static_cast<double>(per_sequence.size());
    double var = 0.0;
    for (const auto& s : per_sequence) {
      double d = getter(s) - mean;
      var += d * d;
    }
    // Sample standard deviation; a single sequence has spread zero.
    double std_dev =
        per_sequence.size() > 1 ? std::sqrt(var / (static_cast<double>(per_sequence.size()) - 1))
                                : 0.0;
    return {mean, std_dev};
  };

  std::tie(agg.mean_accel, agg.std_accel) =
      mean_std([](const SequenceMetrics& s) { return s.accel; });
  std::tie(agg.mean_jerk, agg.std_jerk) =
      mean_std([](const SequenceMetrics& s) { return s.jerk; });

  agg.has_rmse = true;
  for (const auto& s : per_sequence)
    if (!s.rmse) agg.has_rmse = false;
  if (agg.has_rmse) {
    std::tie(agg.mean_rmse, agg.std_rmse) =
        mean_std([](const SequenceMetrics& s) { return *s.rmse; });
  }
  return agg;
}

VelocityHistogram velocity_histogram(const std::vector<Eigen::MatrixXd>& position_tracks,
                                     const std::vector<int>& joints, double fps,
                                     double bin_width) {
  if (bin_width <= 0) throw ConfigError("velocity_histogram: bin width must be positive");
  VelocityHistogram hist;
  hist.bin_width = bin_width;

  std::vector<double> counts;
  double total = 0.0;
  for (const auto& positions : position_tracks) {
    if (positions.rows() < 2) continue;
    Eigen::MatrixXd vel = diff_rows(positions, fps);
    for (int j : joints) {
      if (3 * j + 2 >= vel.cols())
        throw ShapeError("velocity_histogram: joint index out of range");
      Eigen::VectorXd speed = vel.middleCols(3 * j, 3).rowwise().norm();
      for (Eigen::Index i = 0; i < speed.size(); ++i) {
        auto bin = static_cast<std::size_t>(std::floor(speed[i] / bin_width));
        if (counts.size() <= bin) counts.resize(bin + 1, 0.0);
        counts[bin] += 1.0;
        total += 1.0;
      }
    }
  }
  if (total > 0)
    for (double& c : counts) c /= total;
  hist.frequency = std::move(counts);
  return hist;
}

std::string format_report_table(const std::vector<SystemReport>& systems) {
  std::size_t name_w = 6;
  for (const auto& s : systems) name_w = std::max(name_w, s.name.size());

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %14s  %14s  %14s\n", static_cast<int>(name_w), "system",
                "accel (cm/s^2)", "jerk (cm/s^3)", "rmse (cm)");
  out << buf;
  for (const auto& s : systems) {
    std::string rmse = s.metrics.has_rmse
                           ? fmt(s.metrics.mean_rmse, "%.2f") + " +/- " +
                                 fmt(s.metrics.std_rmse, "%.2f")
                           : std::string("-");
    std::snprintf(buf, sizeof(buf), "%-*s  %7s +/- %-7s  %7s +/- %-7s  %s\n",
                  static_cast<int>(name_w), s.name.c_str(), fmt(s.metrics.mean_accel, "%.2f").c_str(),
                  fmt(s.metrics.std_accel, "%.2f").c_str(), fmt(s.metrics.mean_jerk, "%.2f").c_str(),
                  fmt(s.metrics.std_jerk, "%.2f").c_str(), rmse.c_str());
    out << buf;
  }
  return out.str();
}

std::string format_report_csv(const std::vector<SystemReport>& systems) {
  std::string out = "system,mean_accel,std_accel,mean_jerk,std_jerk,rmse,std_rmse\n";
  for (const auto& s : systems) {
    out += s.name + "," + fmt(s.metrics.mean_accel) + "," + fmt(s.metrics.std_accel) + "," +
           fmt(s.metrics.mean_jerk) + "," + fmt(s.metrics.std_jerk) + ",";
    if (s.metrics.has_rmse)
      out += fmt(s.metrics.mean_rmse) + "," + fmt(s.metrics.std_rmse);
    else
      out += ",";
    out += "\n";
  }
  return out;
}

std::string format_histogram_csv(const VelocityHistogram& hist) {
  std::string out = "bin_low,frequency\n";
  for (std::size_t i = 0; i < hist.frequency.size(); ++i)
    out += fmt(static_cast<double>(i) * hist.bin_width) + "," + fmt(hist.frequency[i]) + "\n";
  return out;
}

}  // namespace gesticulate
