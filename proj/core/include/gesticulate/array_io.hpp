#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gesticulate {

// Sidecar metadata written next to every binary array file.  The binary file
// holds raw little-endian values in row-major order; the sidecar carries the
// dtype, the shape and whatever extra context the producer wants to keep.
struct ArraySidecar {
  std::string dtype = "float64";  // "float64" or "float32"
  std::vector<std::size_t> shape;
  double fps = 0.0;  // frames per second for time tracks, 0 when unused

  // Embedding files: token order, one word per row.
  std::vector<std::string> words;
  // Embedding files: optional precomputed filler vector (768 values).
  std::vector<double> filler_vector;

  // PCA spaces: per-dimension mean and per-component variance ratios.
  std::vector<double> mean;
  std::vector<double> explained_variance_ratio;

  std::string note;
};

// Path of the sidecar belonging to a binary array file ("x.bin" -> "x.json").
std::filesystem::path sidecar_path(const std::filesystem::path& bin_path);

// Writes `rows` (row-major) to bin_path and the sidecar next to it.  When
// meta.shape is empty it becomes {rows(), cols()}.
void save_array(const std::filesystem::path& bin_path, const Eigen::MatrixXd& rows,
                ArraySidecar meta = {});

struct LoadedArray {
  Eigen::MatrixXd data;  // 1-D arrays come back as a single row
  ArraySidecar meta;
};

// Loads a binary array plus sidecar; throws SchemaError on dtype/shape
// mismatches and IoError when files are missing.
LoadedArray load_array(const std::filesystem::path& bin_path);

}  // namespace gesticulate
