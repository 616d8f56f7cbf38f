#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace gesticulate {

enum class BvhChannel { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

struct BvhJoint {
  std::string name;
  int parent = -1;  // index into joints, -1 for the root
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::vector<BvhChannel> channels;  // order as declared in the file
  int channel_start = 0;             // first column of this joint in `frames`
  Eigen::Vector3d end_site = Eigen::Vector3d::Zero();
  bool has_end_site = false;
};

struct BvhData {
  std::vector<BvhJoint> joints;
  Eigen::MatrixXd frames;  // frame count x total channels, rotations in degrees
  double frame_time = 0.0;

  double fps() const { return frame_time > 0 ? 1.0 / frame_time : 0.0; }
  double duration() const { return frames.rows() * frame_time; }
  int joint_index(const std::string& name) const;  // -1 when absent
};

// Parses a BVH file.  Supports nested joints, End Site blocks and the
// standard channel sets.  Throws SchemaError on structural problems.
BvhData read_bvh(const std::filesystem::path& path);
BvhData parse_bvh(const std::string& text);

void write_bvh(const std::filesystem::path& path, const BvhData& data);
std::string format_bvh(const BvhData& data);

}  // namespace gesticulate
