#include "gesticulate/motion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gesticulate/errors.hpp"
#include "gesticulate/rotation.hpp"

namespace gesticulate {

namespace {

// Rotation channel columns and order for one BVH joint.
struct RotChannels {
  std::vector<BvhChannel> order;
  std::vector<int> columns;
};

RotChannels rotation_channels(const BvhJoint& j) {
  RotChannels rc;
  for (std::size_t i = 0; i < j.channels.size(); ++i) {
    BvhChannel ch = j.channels[i];
    if (ch == BvhChannel::Xrotation || ch == BvhChannel::Yrotation ||
        ch == BvhChannel::Zrotation) {
      rc.order.push_back(ch);
      rc.columns.push_back(j.channel_start + static_cast<int>(i));
    }
  }
  return rc;
}

}  // namespace

int Skeleton::index(const std::string& name) const {
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return static_cast<int>(i);
  return -1;
}

const std::vector<std::string>& default_joint_names() {
  static const std::vector<std::string> kNames = {
      "Hips",          "Spine",    "Spine1",       "Spine2",      "Spine3",
      "Neck",          "Head",     "RightShoulder", "RightArm",    "RightForeArm",
      "RightHand",     "LeftShoulder", "LeftArm",  "LeftForeArm", "LeftHand",
  };
  return kNames;
}

const std::vector<std::string>& default_wrist_names() {
  static const std::vector<std::string> kWrists = {"RightHand", "LeftHand"};
  return kWrists;
}

Skeleton Skeleton::default_upper_body() {
  Skeleton s;
  auto add = [&s](const std::string& name, const std::string& parent, double x, double y,
                  double z) {
    Joint j;
    j.name = name;
    j.parent = parent.empty() ? -1 : s.index(parent);
    j.offset = Eigen::Vector3d(x, y, z);
    s.joints.push_back(std::move(j));
  };
  // Offsets in centimeters; arms extend along x in the rest pose.
  add("Hips", "", 0, 0, 0);
  add("Spine", "Hips", 0, 9, 0);
  add("Spine1", "Spine", 0, 9, 0);
  add("Spine2", "Spine1", 0, 9, 0);
  add("Spine3", "Spine2", 0, 9, 0);
  add("Neck", "Spine3", 0, 12, 0);
  add("Head", "Neck", 0, 10, 0);
  add("RightShoulder", "Spine3", -4, 10, 0);
  add("RightArm", "RightShoulder", -12, 0, 0);
  add("RightForeArm", "RightArm", -26, 0, 0);
  add("RightHand", "RightForeArm", -25, 0, 0);
  add("LeftShoulder", "Spine3", 4, 10, 0);
  add("LeftArm", "LeftShoulder", 12, 0, 0);
  add("LeftForeArm", "LeftArm", 26, 0, 0);
  add("LeftHand", "LeftForeArm", 25, 0, 0);
  return s;
}

Skeleton Skeleton::from_bvh(const BvhData& bvh, const std::vector<std::string>& names) {
  Skeleton s;
  std::vector<int> bvh_index(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    int bi = bvh.joint_index(names[i]);
    if (bi < 0) throw SchemaError("bvh hierarchy lacks joint '" + names[i] + "'");
    bvh_index[i] = bi;
  }

  auto selected = [&](int bi) -> int {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (bvh_index[i] == bi) return static_cast<int>(i);
    return -1;
  };

  for (std::size_t i = 0; i < names.size(); ++i) {
    Joint j;
    j.name = names[i];
    // Walk up to the nearest selected ancestor, accumulating offsets of the
    // skipped joints.
    Eigen::Vector3d offset = bvh.joints[static_cast<std::size_t>(bvh_index[i])].offset;
    int p = bvh.joints[static_cast<std::size_t>(bvh_index[i])].parent;
    int parent_sel = -1;
    while (p >= 0) {
      parent_sel = selected(p);
      if (parent_sel >= 0) break;
      offset += bvh.joints[static_cast<std::size_t>(p)].offset;
      p = bvh.joints[static_cast<std::size_t>(p)].parent;
    }
    j.parent = parent_sel;
    j.offset = parent_sel >= 0 ? offset : Eigen::Vector3d::Zero();
    if (parent_sel >= 0 && parent_sel >= static_cast<int>(i))
      throw SchemaError("skeleton joints must be listed parents-first ('" + names[i] + "')");
    s.joints.push_back(std::move(j));
  }
  return s;
}

MotionTrack to_expmap(const BvhData& bvh, const Skeleton& skeleton, double target_fps) {
  if (bvh.frame_time <= 0) throw SchemaError("bvh frame time missing");
  if (target_fps <= 0) throw ConfigError("target fps must be positive");

  const int n_src = static_cast<int>(bvh.frames.rows());
  const int n_joints = skeleton.size();

  std::vector<RotChannels> channels;
  channels.reserve(static_cast<std::size_t>(n_joints));
  for (const auto& joint : skeleton.joints) {
    int bi = bvh.joint_index(joint.name);
    if (bi < 0) throw SchemaError("bvh hierarchy lacks joint '" + joint.name + "'");
    channels.push_back(rotation_channels(bvh.joints[static_cast<std::size_t>(bi)]));
  }

  // Source-rate expmap with antipodal continuity per joint.
  Eigen::MatrixXd src(n_src, 3 * n_joints);
  for (int j = 0; j < n_joints; ++j) {
    const RotChannels& rc = channels[static_cast<std::size_t>(j)];
    Eigen::Vector3d prev = Eigen::Vector3d::Zero();
    for (int f = 0; f < n_src; ++f) {
      Eigen::Vector3d degrees = Eigen::Vector3d::Zero();
      for (std::size_t c = 0; c < rc.columns.size(); ++c)
        degrees[static_cast<Eigen::Index>(c)] = bvh.frames(f, rc.columns[c]);
      Eigen::Vector3d e = quat_to_expmap(euler_to_quat(rc.order, degrees));
      if (f > 0) e = expmap_continuous(e, prev);
      src.block<1, 3>(f, 3 * j) = e.transpose();
      prev = e;
    }
  }

  MotionTrack track;
  track.fps = target_fps;
  if (n_src == 0) {
    track.frames.resize(0, 3 * n_joints);
    return track;
  }

  double src_fps = bvh.fps();
  double ratio = src_fps / target_fps;  // source frames per target frame
  int n_out = static_cast<int>(std::floor((n_src - 1) / ratio + 1e-9)) + 1;
  track.frames.resize(n_out, 3 * n_joints);

  bool integer_ratio = std::abs(ratio - std::round(ratio)) < 1e-6 && ratio >= 1.0;
  if (integer_ratio) {
    int stride = static_cast<int>(std::round(ratio));
    for (int i = 0; i < n_out; ++i) track.frames.row(i) = src.row(i * stride);
  } else {
    for (int i = 0; i < n_out; ++i) {
      double p = i * ratio;
      int lo = static_cast<int>(std::floor(p));
      int hi = std::min(lo + 1, n_src - 1);
      double w = p - lo;
      track.frames.row(i) = (1.0 - w) * src.row(lo) + w * src.row(hi);
    }
  }
  return track;
}

Eigen::MatrixXd forward_kinematics(const MotionTrack& motion, const Skeleton& skeleton) {
  const int n_joints = skeleton.size();
  if (motion.frames.cols() != 3 * n_joints)
    throw ShapeError("forward_kinematics: track has " + std::to_string(motion.frames.cols()) +
                     " columns for " + std::to_string(n_joints) + " joints");

  const Eigen::Index T = motion.frames.rows();
  Eigen::MatrixXd positions(T, 3 * n_joints);
  std::vector<Eigen::Quaterniond> global(static_cast<std::size_t>(n_joints));
  std::vector<Eigen::Vector3d> pos(static_cast<std::size_t>(n_joints));

  for (Eigen::Index t = 0; t < T; ++t) {
    for (int j = 0; j < n_joints; ++j) {
      Eigen::Vector3d e = motion.frames.block<1, 3>(t, 3 * j).transpose();
      Eigen::Quaterniond local = expmap_to_quat(e);
      int parent = skeleton.joints[static_cast<std::size_t>(j)].parent;
      if (parent < 0) {
        global[static_cast<std::size_t>(j)] = local;
        pos[static_cast<std::size_t>(j)] = Eigen::Vector3d::Zero();  // root pinned
      } else {
        const auto& pq = global[static_cast<std::size_t>(parent)];
        global[static_cast<std::size_t>(j)] = pq * local;
        pos[static_cast<std::size_t>(j)] =
            pos[static_cast<std::size_t>(parent)] +
            pq * skeleton.joints[static_cast<std::size_t>(j)].offset;
      }
      positions.block<1, 3>(t, 3 * j) = pos[static_cast<std::size_t>(j)].transpose();
    }
  }
  return positions;
}

BvhData to_bvh(const MotionTrack& motion, const Skeleton& skeleton) {
  const int n_joints = skeleton.size();
  if (motion.frames.cols() != 3 * n_joints)
    throw ShapeError("to_bvh: joint count mismatch");
  if (motion.fps <= 0) throw ConfigError("to_bvh: fps must be positive");

  BvhData data;
  int cursor = 0;
  for (int j = 0; j < n_joints; ++j) {
    BvhJoint bj;
    bj.name = skeleton.joints[static_cast<std::size_t>(j)].name;
    bj.parent = skeleton.joints[static_cast<std::size_t>(j)].parent;
    bj.offset = skeleton.joints[static_cast<std::size_t>(j)].offset;
    if (j == 0)
      bj.channels = {BvhChannel::Xposition, BvhChannel::Yposition, BvhChannel::Zposition,
                     BvhChannel::Zrotation, BvhChannel::Xrotation, BvhChannel::Yrotation};
    else
      bj.channels = {BvhChannel::Zrotation, BvhChannel::Xrotation, BvhChannel::Yrotation};
    bj.channel_start = cursor;
    cursor += static_cast<int>(bj.channels.size());
    data.joints.push_back(std::move(bj));
  }

  data.frame_time = 1.0 / motion.fps;
  const Eigen::Index T = motion.frames.rows();
  data.frames = Eigen::MatrixXd::Zero(T, cursor);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int j = 0; j < n_joints; ++j) {
      Eigen::Vector3d e = motion.frames.block<1, 3>(t, 3 * j).transpose();
      Eigen::Vector3d xyz_deg = quat_to_euler_zxy_deg(expmap_to_quat(e));
      int base = data.joints[static_cast<std::size_t>(j)].channel_start + (j == 0 ? 3 : 0);
      data.frames(t, base + 0) = xyz_deg.z();  // Zrotation
      data.frames(t, base + 1) = xyz_deg.x();  // Xrotation
      data.frames(t, base + 2) = xyz_deg.y();  // Yrotation
    }
  }
  return data;
}

void export_motion(const std::filesystem::path& path, const MotionTrack& motion,
                   const Skeleton& skeleton) {
  std::string ext = path.extension().string();
  if (ext == ".bvh") {
    write_bvh(path, to_bvh(motion, skeleton));
    return;
  }
  if (ext == ".csv") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "frame";
    for (int j = 0; j < skeleton.size(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",j%02dx,j%02dy,j%02dz", j, j, j);
      out << buf;
    }
    out << "\n";
    for (Eigen::Index t = 0; t < motion.frames.rows(); ++t) {
      out << t;
      char buf[40];
      for (Eigen::Index c = 0; c < motion.frames.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), ",%.10g", motion.frames(t, c));
        out << buf;
      }
      out << "\n";
    }
    return;
  }
  throw ConfigError("export_motion: unsupported extension '" + ext + "' (use .bvh or .csv)");
}

MotionTrack import_motion(const std::filesystem::path& path, const Skeleton& skeleton,
                          double target_fps) {
  std::string ext = path.extension().string();
  if (ext == ".bvh") {
    BvhData bvh = read_bvh(path);
    std::vector<std::string> names;
    for (const auto& j : skeleton.joints) names.push_back(j.name);
    return to_expmap(bvh, Skeleton::from_bvh(bvh, names), target_fps);
  }
  if (ext == ".csv") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty csv");
    std::vector<Eigen::VectorXd> rows;
    const int want = 3 * skeleton.size();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
      if (static_cast<int>(vals.size()) != want + 1)
        throw SchemaError(path.string() + ": row has " + std::to_string(vals.size()) +
                          " cells, expected " + std::to_string(want + 1));
      rows.push_back(Eigen::Map<Eigen::VectorXd>(vals.data() + 1, want));
    }
    MotionTrack track;
    track.fps = target_fps;
    track.frames.resize(static_cast<Eigen::Index>(rows.size()), want);
    for (std::size_t i = 0; i < rows.size(); ++i)
      track.frames.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return track;
  }
  throw ConfigError("import_motion: unsupported extension '" + ext + "'");
}

}  // namespace gesticulate
