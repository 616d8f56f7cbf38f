#pragma once

#include <Eigen/Core>
#include <vector>

#include "gesticulate/checkpoint.hpp"
#include "gesticulate/motion.hpp"

namespace gesticulate {

enum class SeedMode { mean_pose, zeros, provided };

struct GenerateOptions {
  SeedMode seed = SeedMode::mean_pose;
  // Raw-space poses (newest last) used when seed == provided; projected into
  // model space as needed.
  std::vector<Eigen::VectorXd> seed_poses;
};

// Initial pose-context queue in model output space, oldest first.
std::vector<Eigen::VectorXd> seed_history(const Checkpoint& ckpt, const GenerateOptions& opts);

// Runs the model over aligned audio/text feature tracks (equal length, same
// rate) and returns raw pose frames (PCA-reconstructed when the model lives
// in PCA space).  Output length equals input length; windows at the edges
// are padded with the silence-frame encoding.
MotionTrack generate_motion(const Checkpoint& ckpt, const Eigen::MatrixXd& audio_track,
                            const Eigen::MatrixXd& text_track,
                            const GenerateOptions& opts = {});

// The feature-space silence frame: log-floor mel row and V_s text row with
// zero duration scalars.  Used for window padding and tests.
Eigen::VectorXd silence_audio_frame(const NetConfig& cfg);
Eigen::VectorXd silence_text_frame(const NetConfig& cfg);

}  // namespace gesticulate
