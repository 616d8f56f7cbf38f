#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "gesticulate/bvh.hpp"

namespace gesticulate {

// Exponential-map vector: rotation axis scaled by angle (radians).
Eigen::Vector3d quat_to_expmap(const Eigen::Quaterniond& q);
Eigen::Quaterniond expmap_to_quat(const Eigen::Vector3d& e);

// Composes BVH Euler rotations (degrees) in the declared channel order.
Eigen::Quaterniond euler_to_quat(const std::vector<BvhChannel>& channels,
                                 const Eigen::Vector3d& degrees);

// Inverse for the Zrotation/Xrotation/Yrotation order used on export.
Eigen::Vector3d quat_to_euler_zxy_deg(const Eigen::Quaterniond& q);

// Picks the expmap representation of `e` (either e itself or the antipodal
// (|e| - 2*pi) form) closest to `prev`, keeping tracks continuous.
Eigen::Vector3d expmap_continuous(const Eigen::Vector3d& e, const Eigen::Vector3d& prev);

}  // namespace gesticulate
