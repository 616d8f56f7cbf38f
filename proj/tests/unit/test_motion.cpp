#include <doctest.h>

#include <cmath>
#include <random>

#include "gesticulate/errors.hpp"
#include "gesticulate/motion.hpp"
#include "gesticulate/rng.hpp"
#include "gesticulate/rotation.hpp"
#include "synthetic.hpp"

using namespace gesticulate;

namespace {

Eigen::Quaterniond random_rotation(std::mt19937_64& rng) {
  Eigen::Quaterniond q(rand_normal(rng), rand_normal(rng), rand_normal(rng), rand_normal(rng));
  q.normalize();
  return q;
}

double rotation_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.angularDistance(b);
}

}  // namespace

TEST_CASE("expmap/quaternion round trips preserve the rotation") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    auto q = random_rotation(rng);
    auto e = quat_to_expmap(q);
    auto back = expmap_to_quat(e);
    CHECK(rotation_distance(q, back) < 1e-9);
    CHECK(e.norm() <= M_PI + 1e-9);  // canonical, shortest arc
  }
}

TEST_CASE("identity maps to the zero exponential map") {
  CHECK(quat_to_expmap(Eigen::Quaterniond::Identity()).norm() == doctest::Approx(0.0));
  auto q = expmap_to_quat(Eigen::Vector3d::Zero());
  CHECK(rotation_distance(q, Eigen::Quaterniond::Identity()) < 1e-12);
}

TEST_CASE("euler_to_quat composes channels in declared order") {
  std::vector<BvhChannel> zxy = {BvhChannel::Zrotation, BvhChannel::Xrotation,
                                 BvhChannel::Yrotation};
  // 90 deg about Z alone.
  auto q = euler_to_quat(zxy, Eigen::Vector3d(90.0, 0.0, 0.0));
  Eigen::Quaterniond expect(Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()));
  CHECK(rotation_distance(q, expect) < 1e-12);

  // Composition order matters: Z then X differs from X then Z.
  auto q_zx = euler_to_quat(zxy, Eigen::Vector3d(90.0, 45.0, 0.0));
  Eigen::Quaterniond manual = Eigen::AngleAxisd(M_PI / 2, Eigen::Vector3d::UnitZ()) *
                              Eigen::AngleAxisd(M_PI / 4, Eigen::Vector3d::UnitX());
  CHECK(rotation_distance(q_zx, manual) < 1e-12);
}

TEST_CASE("zxy euler export inverts euler_to_quat") {
  std::vector<BvhChannel> zxy = {BvhChannel::Zrotation, BvhChannel::Xrotation,
                                 BvhChannel::Yrotation};
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    // Gimbal-safe random angles, channel order (z, x, y).
    Eigen::Vector3d deg(rand_range(rng, -170, 170), rand_range(rng, -80, 80),
                        rand_range(rng, -170, 170));
    auto q = euler_to_quat(zxy, deg);
    // The export helper reports per-axis angles (x, y, z).
    auto xyz = quat_to_euler_zxy_deg(q);
    auto q2 = euler_to_quat(zxy, Eigen::Vector3d(xyz.z(), xyz.x(), xyz.y()));
    CHECK(rotation_distance(q, q2) < 1e-9);
  }
}

TEST_CASE("expmap_continuous picks the representation nearest the previous frame") {
  Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 0.5).normalized();
  Eigen::Vector3d prev = axis * 3.0;
  // A shortest-arc expmap pointing the other way: equivalent rotation is
  // axis * (2*pi - 3.2) on the flipped axis.
  Eigen::Vector3d e = -axis * (2.0 * M_PI - 3.2);
  auto fixed = expmap_continuous(e, prev);
  CHECK((fixed - axis * 3.2).norm() < 1e-9);
  // Same rotation either way.
  CHECK(rotation_distance(expmap_to_quat(e), expmap_to_quat(fixed)) < 1e-9);
  // Near representations pass through untouched.
  Eigen::Vector3d near = axis * 3.1;
  CHECK((expmap_continuous(near, prev) - near).norm() == doctest::Approx(0.0));
}

TEST_CASE("synthetic bvh parses with the expected hierarchy") {
  testsupport::MotionSpec spec;
  auto bvh = parse_bvh(testsupport::synthetic_bvh_text(spec));
  REQUIRE(bvh.joints.size() == 15);
  CHECK(bvh.joints[0].name == "Hips");
  CHECK(bvh.joints[0].parent == -1);
  CHECK(bvh.joints[0].channels.size() == 6);
  CHECK(bvh.frames.rows() == spec.frames);
  CHECK(bvh.frames.cols() == 6 + 14 * 3);
  CHECK(bvh.frame_time == doctest::Approx(0.01));
  CHECK(bvh.joint_index("Head") >= 0);
  CHECK(bvh.joint_index("Nope") == -1);

  int head = bvh.joint_index("Head");
  int neck = bvh.joint_index("Neck");
  CHECK(bvh.joints[static_cast<std::size_t>(head)].parent == neck);
}

TEST_CASE("bvh format/parse round trip") {
  testsupport::MotionSpec spec;
  spec.frames = 50;
  auto bvh = parse_bvh(testsupport::synthetic_bvh_text(spec));
  auto again = parse_bvh(format_bvh(bvh));
  REQUIRE(again.joints.size() == bvh.joints.size());
  for (std::size_t j = 0; j < bvh.joints.size(); ++j) {
    CHECK(again.joints[j].name == bvh.joints[j].name);
    CHECK(again.joints[j].parent == bvh.joints[j].parent);
    CHECK((again.joints[j].offset - bvh.joints[j].offset).norm() < 1e-5);
    CHECK(again.joints[j].channels == bvh.joints[j].channels);
  }
  CHECK(again.frames.rows() == bvh.frames.rows());
  CHECK((again.frames - bvh.frames).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(again.frame_time == doctest::Approx(bvh.frame_time).epsilon(1e-8));
}

TEST_CASE("bvh parser rejects structural garbage") {
  CHECK_THROWS_AS(parse_bvh("not a bvh file"), SchemaError);
  CHECK_THROWS_AS(parse_bvh("HIERARCHY\nROOT A\n{\nOFFSET 0 0 0\n"), SchemaError);
}

TEST_CASE("skeleton subset accumulates offsets across skipped joints") {
  const char* text =
      "HIERARCHY\n"
      "ROOT Base\n"
      "{\n"
      "  OFFSET 0 0 0\n"
      "  CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "  JOINT Mid\n"
      "  {\n"
      "    OFFSET 0 5 0\n"
      "    CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "    JOINT Tip\n"
      "    {\n"
      "      OFFSET 0 3 0\n"
      "      CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "      End Site\n"
      "      {\n"
      "        OFFSET 0 1 0\n"
      "      }\n"
      "    }\n"
      "  }\n"
      "}\n"
      "MOTION\n"
      "Frames: 1\n"
      "Frame Time: 0.05\n"
      "0 0 0 0 0 0 0 0 0\n";
  auto bvh = parse_bvh(text);
  auto skel = Skeleton::from_bvh(bvh, {"Base", "Tip"});
  REQUIRE(skel.size() == 2);
  CHECK(skel.joints[1].name == "Tip");
  CHECK(skel.joints[1].parent == 0);
  CHECK((skel.joints[1].offset - Eigen::Vector3d(0, 8, 0)).norm() < 1e-12);
}

TEST_CASE("default upper body skeleton matches the canonical joint list") {
  auto skel = Skeleton::default_upper_body();
  const auto& names = default_joint_names();
  REQUIRE(skel.size() == 15);
  REQUIRE(names.size() == 15);
  CHECK(names[0] == "Hips");
  for (int j = 0; j < skel.size(); ++j) {
    CHECK(skel.joints[static_cast<std::size_t>(j)].name == names[static_cast<std::size_t>(j)]);
    if (j > 0) CHECK(skel.joints[static_cast<std::size_t>(j)].parent >= 0);
  }
  for (const auto& wrist : default_wrist_names()) CHECK(skel.index(wrist) >= 0);
}

TEST_CASE("to_expmap decimates integer rate ratios") {
  testsupport::MotionSpec spec;
  spec.frames = 401;  // 100 fps source
  auto bvh = parse_bvh(testsupport::synthetic_bvh_text(spec));
  auto skel = Skeleton::from_bvh(bvh, default_joint_names());
  auto track = to_expmap(bvh, skel, 20.0);
  CHECK(track.fps == doctest::Approx(20.0));
  CHECK(track.length() == 81);  // frames 0,5,...,400
  CHECK(track.joints() == 15);
  CHECK(track.frames.allFinite());
}

TEST_CASE("to_expmap tracks are continuous frame to frame") {
  testsupport::MotionSpec spec;
  spec.frames = 401;
  auto bvh = parse_bvh(testsupport::synthetic_bvh_text(spec));
  auto skel = Skeleton::from_bvh(bvh, default_joint_names());
  auto track = to_expmap(bvh, skel, 20.0);
  for (int t = 1; t < track.length(); ++t) {
    double step = (track.frames.row(t) - track.frames.row(t - 1)).cwiseAbs().maxCoeff();
    CHECK(step < 1.0);  // no antipodal jumps (order 2*pi)
  }
}

TEST_CASE("to_expmap follows a rotation sweeping past 180 degrees") {
  // One joint spinning about Z from 0 to 350 degrees: the canonical expmap
  // would wrap at 180, the continuous track must keep growing instead.
  std::string text =
      "HIERARCHY\n"
      "ROOT Spin\n"
      "{\n"
      "  OFFSET 0 0 0\n"
      "  CHANNELS 3 Zrotation Xrotation Yrotation\n"
      "  End Site\n"
      "  {\n"
      "    OFFSET 0 1 0\n"
      "  }\n"
      "}\n"
      "MOTION\n"
      "Frames: 36\n"
      "Frame Time: 0.05\n";
  for (int f = 0; f < 36; ++f) text += std::to_string(f * 10.0) + " 0 0\n";

  auto bvh = parse_bvh(text);
  Skeleton skel;
  skel.joints.push_back({"Spin", -1, Eigen::Vector3d::Zero()});
  auto track = to_expmap(bvh, skel, 20.0);
  REQUIRE(track.length() == 36);
  for (int t = 0; t < 36; ++t) {
    double angle = t * 10.0 * M_PI / 180.0;
    CHECK(track.frames(t, 2) == doctest::Approx(angle).epsilon(1e-9));
  }
}

TEST_CASE("forward kinematics keeps bone lengths rigid") {
  auto skel = Skeleton::default_upper_body();
  std::mt19937_64 rng(77);
  MotionTrack motion;
  motion.frames = Eigen::MatrixXd(4, 3 * skel.size());
  for (Eigen::Index i = 0; i < motion.frames.size(); ++i)
    motion.frames(i) = rand_range(rng, -1.5, 1.5);

  auto pos = forward_kinematics(motion, skel);
  REQUIRE(pos.rows() == 4);
  REQUIRE(pos.cols() == 3 * skel.size());
  for (Eigen::Index t = 0; t < pos.rows(); ++t) {
    // Root pinned at the origin.
    CHECK(pos.block<1, 3>(t, 0).norm() == doctest::Approx(0.0));
    for (int j = 1; j < skel.size(); ++j) {
      int p = skel.joints[static_cast<std::size_t>(j)].parent;
      Eigen::Vector3d delta = (pos.block<1, 3>(t, 3 * j) - pos.block<1, 3>(t, 3 * p)).transpose();
      CHECK(delta.norm() ==
            doctest::Approx(skel.joints[static_cast<std::size_t>(j)].offset.norm()).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero pose forward kinematics stacks the rest offsets") {
  auto skel = Skeleton::default_upper_body();
  MotionTrack motion;
  motion.frames = Eigen::MatrixXd::Zero(1, 3 * skel.size());
  auto pos = forward_kinematics(motion, skel);
  for (int j = 0; j < skel.size(); ++j) {
    Eigen::Vector3d expect = Eigen::Vector3d::Zero();
    for (int a = j; a != -1; a = skel.joints[static_cast<std::size_t>(a)].parent)
      expect += skel.joints[static_cast<std::size_t>(a)].offset;
    CHECK((pos.block<1, 3>(0, 3 * j).transpose() - expect).norm() < 1e-12);
  }
}

namespace {

// Smooth per-joint sinusoid track; steps stay well below the antipodal
// ambiguity so expmap values survive a BVH round trip unchanged.
Eigen::MatrixXd smooth_track(int frames, int joints, unsigned seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd m(frames, 3 * joints);
  for (int c = 0; c < 3 * joints; ++c) {
    double amp = rand_range(rng, 0.1, 0.8);
    double freq = rand_range(rng, 0.2, 1.0);
    double phase = rand_range(rng, 0.0, 2.0 * M_PI);
    for (int t = 0; t < frames; ++t)
      m(t, c) = amp * std::sin(2.0 * M_PI * freq * t / 20.0 + phase);
  }
  return m;
}

}  // namespace

TEST_CASE("bvh export/import round trip") {
  testsupport::TempDir tmp;
  auto skel = Skeleton::default_upper_body();
  MotionTrack motion;
  motion.frames = smooth_track(30, skel.size(), 15);

  auto path = tmp.path() / "clip.bvh";
  export_motion(path, motion, skel);
  auto back = import_motion(path, skel);
  REQUIRE(back.length() == motion.length());
  REQUIRE(back.joints() == motion.joints());
  CHECK((back.frames - motion.frames).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("bvh export/import preserves the rotations of jumpy tracks") {
  // Discontinuous frames may come back in a different (equivalent) expmap
  // representation; the rotations themselves must survive exactly.
  testsupport::TempDir tmp;
  auto skel = Skeleton::default_upper_body();
  std::mt19937_64 rng(15);
  MotionTrack motion;
  motion.frames = Eigen::MatrixXd(10, 3 * skel.size());
  for (Eigen::Index i = 0; i < motion.frames.size(); ++i)
    motion.frames(i) = rand_range(rng, -1.2, 1.2);

  auto path = tmp.path() / "jumpy.bvh";
  export_motion(path, motion, skel);
  auto back = import_motion(path, skel);
  REQUIRE(back.length() == motion.length());
  for (int t = 0; t < motion.length(); ++t)
    for (int j = 0; j < skel.size(); ++j) {
      Eigen::Vector3d a = motion.frames.block<1, 3>(t, 3 * j).transpose();
      Eigen::Vector3d b = back.frames.block<1, 3>(t, 3 * j).transpose();
      CHECK(expmap_to_quat(a).angularDistance(expmap_to_quat(b)) < 1e-6);
    }
}

TEST_CASE("csv export/import round trip") {
  testsupport::TempDir tmp;
  auto skel = Skeleton::default_upper_body();
  std::mt19937_64 rng(16);
  MotionTrack motion;
  motion.frames = Eigen::MatrixXd(12, 3 * skel.size());
  for (Eigen::Index i = 0; i < motion.frames.size(); ++i)
    motion.frames(i) = rand_range(rng, -2.0, 2.0);

  auto path = tmp.path() / "clip.csv";
  export_motion(path, motion, skel);
  auto back = import_motion(path, skel);
  REQUIRE(back.length() == motion.length());
  CHECK((back.frames - motion.frames).cwiseAbs().maxCoeff() < 1e-8);
}
