#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace gesticulate {

// Linear pose space learned from training frames.  Rows of `components` are
// orthonormal principal directions (k x d).
struct PcaSpace {
  Eigen::VectorXd mean;                       // d
  Eigen::MatrixXd components;                 // k x d
  Eigen::VectorXd explained_variance_ratio;   // k, non-increasing

  int dim() const { return static_cast<int>(mean.size()); }
  int num_components() const { return static_cast<int>(components.rows()); }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd reconstruct_rows(const Eigen::MatrixXd& z) const;
};

// Covariance eigendecomposition keeping the smallest component count whose
// cumulative explained variance reaches variance_target.  Component signs
// are canonicalized (largest-magnitude coefficient positive) so refits are
// bit-stable.  Rank-deficient data keeps the nonzero components and warns
// when the target is unreachable.
PcaSpace fit_pca(const Eigen::MatrixXd& frames, double variance_target = 0.92);

void save_pca(const std::filesystem::path& bin_path, const PcaSpace& space);
PcaSpace load_pca(const std::filesystem::path& bin_path);

}  // namespace gesticulate
