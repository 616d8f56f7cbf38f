#include "gesticulate/rotation.hpp"

#include <cmath>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {
constexpr double kTiny = 1e-12;
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;
}  // namespace

Eigen::Vector3d quat_to_expmap(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0) q.coeffs() *= -1.0;  // canonical hemisphere, angle in [0, pi]
  Eigen::Vector3d v(q.x(), q.y(), q.z());
  double n = v.norm();
  if (n < kTiny) return 2.0 * v;  // small-angle: q = (1, e/2)
  double angle = 2.0 * std::atan2(n, q.w());
  return v * (angle / n);
}

Eigen::Quaterniond expmap_to_quat(const Eigen::Vector3d& e) {
  double angle = e.norm();
  if (angle < kTiny) {
    Eigen::Quaterniond q(1.0, e.x() / 2.0, e.y() / 2.0, e.z() / 2.0);
    return q.normalized();
  }
  Eigen::Vector3d axis = e / angle;
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
}

Eigen::Quaterniond euler_to_quat(const std::vector<BvhChannel>& channels,
                                 const Eigen::Vector3d& degrees) {
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  int rot_seen = 0;
  for (BvhChannel ch : channels) {
    Eigen::Vector3d axis;
    switch (ch) {
      case BvhChannel::Xrotation: axis = Eigen::Vector3d::UnitX(); break;
      case BvhChannel::Yrotation: axis = Eigen::Vector3d::UnitY(); break;
      case BvhChannel::Zrotation: axis = Eigen::Vector3d::UnitZ(); break;
      default: continue;  // translation channels do not rotate
    }
    if (rot_seen >= 3) throw SchemaError("joint declares more than three rotation channels");
    q = q * Eigen::Quaterniond(Eigen::AngleAxisd(degrees[rot_seen] * kDegToRad, axis));
    ++rot_seen;
  }
  return q;
}

Eigen::Vector3d quat_to_euler_zxy_deg(const Eigen::Quaterniond& q) {
  // R = Rz(z) * Rx(x) * Ry(y); see row 2 = (-cx*sy, sx, cx*cy).
  Eigen::Matrix3d R = q.normalized().toRotationMatrix();
  double sx = std::clamp(R(2, 1), -1.0, 1.0);
  double x = std::asin(sx);
  double y, z;
  if (std::abs(sx) < 1.0 - 1e-9) {
    y = std::atan2(-R(2, 0), R(2, 2));
    z = std::atan2(-R(0, 1), R(1, 1));
  } else {
    // Gimbal lock: only z +/- y is determined; put everything into z.
    y = 0.0;
    z = std::atan2(sx > 0 ? R(0, 2) : -R(0, 2), R(0, 0));
  }
  return Eigen::Vector3d(x, y, z) * kRadToDeg;  // per-axis angles (x, y, z)
}

Eigen::Vector3d expmap_continuous(const Eigen::Vector3d& e, const Eigen::Vector3d& prev) {
  double n = e.norm();
  Eigen::Vector3d axis;
  if (n > kTiny)
    axis = e / n;
  else if (prev.norm() > kTiny)
    axis = prev.normalized();
  else
    return e;

  // Same rotation, angle shifted by full turns (negative magnitudes flip the
  // axis, which covers the antipodal form).
  Eigen::Vector3d best = e;
  double best_d = (e - prev).squaredNorm();
  for (int k = -2; k <= 2; ++k) {
    if (k == 0) continue;
    Eigen::Vector3d cand = e + axis * (2.0 * M_PI * k);
    double d = (cand - prev).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = cand;
    }
  }
  return best;
}

}  // namespace gesticulate
