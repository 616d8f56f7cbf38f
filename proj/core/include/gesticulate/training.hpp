#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gesticulate/corpus.hpp"
#include "gesticulate/net.hpp"
#include "gesticulate/pca.hpp"

namespace gesticulate {

struct LossConfig {
  double lambda_velocity = 0.6;
};

// Position MSE plus lambda * MSE of frame-to-frame differences.  Rows are
// frames.  A single frame has velocity term zero.
double motion_loss(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                   const LossConfig& cfg);
// Both terms separately (position, velocity).
std::pair<double, double> motion_loss_terms(const Eigen::MatrixXd& truth,
                                            const Eigen::MatrixXd& pred);
// dLoss/dPred, same shape as pred.
Eigen::MatrixXd motion_loss_grad(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                                 const LossConfig& cfg);

struct OptimizerConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
};

struct ScheduleConfig {
  int total_epochs = 100;
  int pretrain_epochs = 7;  // non-autoregressive warm-up
};

enum class Phase { pretraining, autoregressive };

struct EpochPhase {
  Phase phase = Phase::pretraining;
  int ar_epoch = 0;  // 1-based once autoregressive
};
EpochPhase phase_for_epoch(int epoch, const ScheduleConfig& cfg);  // epoch is 1-based

// Ground-truth injection mask for one autoregressive epoch: true marks core
// frames whose history entry is replaced by ground truth after prediction.
// Epoch 1 feeds back predictions only; epochs 2..5 inject 2 consecutive
// frames every 16, 8, 4, 1 frames; later epochs keep full injection.
std::vector<char> teacher_forcing_mask(int ar_epoch, int core_frames = kCoreFrames);

struct AdamState {
  ModelWeights m, v;
  std::int64_t step = 0;
};
AdamState make_adam_state(const NetConfig& cfg);
void adam_update(ModelWeights& w, const ModelWeights& grad, AdamState& state,
                 const OptimizerConfig& cfg);

// One 70-frame training sequence in feature space.  Poses are already in
// model output space (PCA-projected when the variant uses PCA).
struct SequenceData {
  Eigen::MatrixXd audio;  // 70 x audio_dim
  Eigen::MatrixXd text;   // 70 x text_dim
  Eigen::MatrixXd pose;   // 70 x output_dim
};

struct BatchStats {
  double loss = 0.0;
  double mse_pos = 0.0;
  double mse_vel = 0.0;
};

// Forward + manual backprop through the unrolled core (gradient flows
// through fed-back predictions), then one Adam step.
BatchStats train_batch(GesticulatorNet& net, const std::vector<const SequenceData*>& batch,
                       bool autoregressive, const std::vector<char>& tf_mask,
                       AdamState& adam, const OptimizerConfig& opt, const LossConfig& loss,
                       std::mt19937_64& rng);

// Loss of a batch without touching weights (eval mode, no dropout).
BatchStats evaluate_batch(const GesticulatorNet& net,
                          const std::vector<const SequenceData*>& batch, bool autoregressive,
                          const std::vector<char>& tf_mask, const LossConfig& loss);

// Computes the full-unroll weight gradient of the batch loss in eval mode;
// used by the finite-difference checks.
ModelWeights batch_gradient(const GesticulatorNet& net,
                            const std::vector<const SequenceData*>& batch, bool autoregressive,
                            const std::vector<char>& tf_mask, const LossConfig& loss,
                            BatchStats* stats = nullptr);

struct TrainRun {
  NetConfig net;
  OptimizerConfig opt;
  LossConfig loss;
  ScheduleConfig sched;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // checkpoints + training_log.csv
  bool timing = false;            // real wall-clock seconds in the log (non-reproducible)
  int checkpoint_every = 1;

  // Carried into checkpoints so generation is self-contained.
  std::optional<PcaSpace> pca;
  Eigen::VectorXd mean_pose;      // raw pose space
  Eigen::VectorXd filler_vector;  // 768
  std::uint64_t pca_hash = 0;
  std::string variant = "full";
};

struct EpochStats {
  int epoch = 0;
  BatchStats stats;
  double seconds = 0.0;
};

struct Checkpoint;  // checkpoint.hpp

// Runs the two-phase schedule (non-autoregressive pretraining, then
// annealed teacher forcing), checkpointing every epoch.  Resuming from a
// checkpoint continues its optimizer and RNG streams, so a run split in two
// matches an uninterrupted one.
Checkpoint train_model(const TrainRun& run, const std::vector<SequenceData>& data,
                       const Checkpoint* resume = nullptr,
                       std::vector<EpochStats>* history = nullptr);

// Named ablation variants ("full", "no_pca", "no_audio", "no_text",
// "no_film", "no_velocity_loss", "no_autoregression").
std::vector<std::string> variant_names();
void apply_variant(const std::string& name, NetConfig& net, LossConfig& loss);

// Cuts feature tracks into SequenceData windows (rows [start, start + 70)).
SequenceData slice_sequence(const Eigen::MatrixXd& audio, const Eigen::MatrixXd& text,
                            const Eigen::MatrixXd& pose, int start);

}  // namespace gesticulate
