#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "gesticulate/bvh.hpp"

namespace gesticulate {

// Reduced upper-body skeleton the generator animates.  Offsets are
// centimeters in the parent frame; the root stays at the origin.
struct Skeleton {
  struct Joint {
    std::string name;
    int parent = -1;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  };
  std::vector<Joint> joints;

  int size() const { return static_cast<int>(joints.size()); }
  int index(const std::string& name) const;  // -1 when absent

  // The 15-joint hierarchy used throughout: hips, spine chain, neck, head,
  // shoulders, arms, forearms, hands.
  static Skeleton default_upper_body();

  // Subset of a BVH hierarchy.  Each requested joint's parent becomes its
  // nearest selected ancestor; offsets accumulate across skipped joints.
  static Skeleton from_bvh(const BvhData& bvh, const std::vector<std::string>& names);
};

// Names used by default_upper_body(), in pose-vector order.
const std::vector<std::string>& default_joint_names();
// Joints whose linear velocity feeds the perceptual histograms.
const std::vector<std::string>& default_wrist_names();

// Pose frames as stacked per-joint expmap triples: T x (3 * joints).
struct MotionTrack {
  Eigen::MatrixXd frames;
  double fps = 20.0;

  int length() const { return static_cast<int>(frames.rows()); }
  int joints() const { return static_cast<int>(frames.cols()) / 3; }
};

// Converts BVH Euler channels to expmap at target_fps.  Joint rotations
// stay local (relative to the rest pose); root translation is dropped.
// Integer rate ratios decimate; fractional ones interpolate linearly in
// expmap space.  Antipodal flips are resolved against the previous frame.
MotionTrack to_expmap(const BvhData& bvh, const Skeleton& skeleton,
                      double target_fps = 20.0);

// Global joint positions (cm) via forward kinematics: T x (3 * joints),
// root fixed at the origin.
Eigen::MatrixXd forward_kinematics(const MotionTrack& motion, const Skeleton& skeleton);

// Rebuilds a BVH clip (ZXY rotation channels, root translation zero).
BvhData to_bvh(const MotionTrack& motion, const Skeleton& skeleton);

// Writes .bvh or .csv depending on the extension.  The CSV has a header
// "frame,j00x,...,jNNz" and one row per frame.
void export_motion(const std::filesystem::path& path, const MotionTrack& motion,
                   const Skeleton& skeleton);

// Reads motion back from either export format.
MotionTrack import_motion(const std::filesystem::path& path, const Skeleton& skeleton,
                          double target_fps = 20.0);

}  // namespace gesticulate
