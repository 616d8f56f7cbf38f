#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gesticulate/net.hpp"
#include "gesticulate/pca.hpp"
#include "gesticulate/training.hpp"

namespace gesticulate {

// Everything needed to resume training or to generate: weights, optimizer
// moments, RNG stream, the pose PCA space and corpus-level vectors.
struct Checkpoint {
  NetConfig net;
  OptimizerConfig opt;
  LossConfig loss;
  ScheduleConfig sched;

  std::uint64_t seed = 0;
  int epoch = 0;  // last completed epoch, 1-based
  std::int64_t adam_step = 0;
  std::string rng_state;       // serialized mt19937_64
  std::uint64_t pca_hash = 0;  // FNV-1a of the PCA file this run used
  std::string variant = "full";

  ModelWeights weights, adam_m, adam_v;
  std::optional<PcaSpace> pca;
  Eigen::VectorXd mean_pose;      // raw pose space (45)
  Eigen::VectorXd filler_vector;  // 768, for text features at generation time
};

// Single binary file: magic + JSON manifest + raw little-endian doubles.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over a file's bytes; 0 for a missing path.
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t n);

}  // namespace gesticulate
