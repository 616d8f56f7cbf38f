#include "gesticulate/inference.hpp"

#include <cmath>
#include <deque>

#include "gesticulate/errors.hpp"
#include "gesticulate/text_features.hpp"

namespace gesticulate {

Eigen::VectorXd silence_audio_frame(const NetConfig& cfg) {
  // Log of the mel power floor: what extract_mel emits for digital silence.
  return Eigen::VectorXd::Constant(cfg.audio_dim, std::log(1e-10));
}

Eigen::VectorXd silence_text_frame(const NetConfig& cfg) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(cfg.text_dim, kSilenceFill);
  if (cfg.text_dim > kDurationDim) v.tail(kDurationDim).setZero();
  return v;
}

std::vector<Eigen::VectorXd> seed_history(const Checkpoint& ckpt, const GenerateOptions& opts) {
  const NetConfig& cfg = ckpt.net;
  auto to_model_space = [&](const Eigen::VectorXd& raw) -> Eigen::VectorXd {
    if (cfg.use_pca) {
      if (!ckpt.pca) throw ConfigError("checkpoint uses PCA but carries no PCA space");
      return ckpt.pca->project(raw);
    }
    return raw;
  };

  std::vector<Eigen::VectorXd> seeds;
  switch (opts.seed) {
    case SeedMode::zeros:
      seeds.assign(static_cast<std::size_t>(cfg.pose_context),
                   Eigen::VectorXd::Zero(cfg.output_dim));
      break;
    case SeedMode::mean_pose: {
      if (ckpt.mean_pose.size() == 0)
        throw ConfigError("checkpoint has no mean pose; use another seed mode");
      Eigen::VectorXd m = to_model_space(ckpt.mean_pose);
      seeds.assign(static_cast<std::size_t>(cfg.pose_context), m);
      break;
    }
    case SeedMode::provided: {
      if (static_cast<int>(opts.seed_poses.size()) < cfg.pose_context)
        throw ConfigError("need " + std::to_string(cfg.pose_context) + " seed poses");
      for (std::size_t i = opts.seed_poses.size() - static_cast<std::size_t>(cfg.pose_context);
           i < opts.seed_poses.size(); ++i)
        seeds.push_back(to_model_space(opts.seed_poses[i]));
      break;
    }
  }
  return seeds;  // oldest first
}

MotionTrack generate_motion(const Checkpoint& ckpt, const Eigen::MatrixXd& audio_track,
                            const Eigen::MatrixXd& text_track, const GenerateOptions& opts) {
  const NetConfig& cfg = ckpt.net;
  if (audio_track.rows() != text_track.rows())
    throw AlignmentError("generate: audio has " + std::to_string(audio_track.rows()) +
                         " frames, text has " + std::to_string(text_track.rows()));
  if (audio_track.cols() != cfg.audio_dim || text_track.cols() != cfg.text_dim)
    throw ShapeError("generate: feature dimensions do not match the checkpoint");
  if (cfg.use_pca && !ckpt.pca)
    throw ConfigError("checkpoint uses PCA but carries no PCA space");

  GesticulatorNet net(cfg);
  net.weights() = ckpt.weights;

  const Eigen::Index T = audio_track.rows();
  const int raw_dim = cfg.use_pca ? ckpt.pca->dim() : cfg.output_dim;
  MotionTrack track;
  track.fps = kFrameRate;
  track.frames.resize(T, raw_dim);
  if (T == 0) return track;

  StepMode eval{};
  Eigen::MatrixXd encodings =
      net.encode_frames(audio_track.transpose(), text_track.transpose(), eval, nullptr);
  Eigen::VectorXd pad =
      net.encode_frame(silence_audio_frame(cfg), silence_text_frame(cfg));

  std::deque<Eigen::VectorXd> history;  // newest in front
  if (cfg.use_autoregression) {
    auto seeds = seed_history(ckpt, opts);
    for (const auto& s : seeds) history.push_front(s);
  }

  Eigen::MatrixXd poses = Eigen::MatrixXd::Zero(cfg.pose_input_dim(), 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd window = net.assemble_window(encodings, static_cast<int>(t), pad);
    if (cfg.use_autoregression)
      for (int j = 0; j < cfg.pose_context; ++j)
        poses.col(0).segment(static_cast<Eigen::Index>(j) * cfg.output_dim, cfg.output_dim) =
            history[static_cast<std::size_t>(j)];

    Eigen::VectorXd y = net.step_forward(window, poses, eval, nullptr).col(0);
    if (cfg.use_autoregression) {
      history.push_front(y);
      history.pop_back();
    }
    track.frames.row(t) =
        cfg.use_pca ? ckpt.pca->reconstruct(y).transpose() : y.transpose();
  }

  if (!track.frames.allFinite()) throw NumericError("generate: non-finite pose output");
  return track;
}

}  // namespace gesticulate
