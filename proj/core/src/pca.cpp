#include "gesticulate/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>

#include "gesticulate/array_io.hpp"
#include "gesticulate/errors.hpp"

namespace gesticulate {

Eigen::VectorXd PcaSpace::project(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw ShapeError("pca project: dimension mismatch");
  return components * (x - mean);
}

Eigen::VectorXd PcaSpace::reconstruct(const Eigen::VectorXd& z) const {
  if (z.size() != components.rows()) throw ShapeError("pca reconstruct: dimension mismatch");
  return mean + components.transpose() * z;
}

Eigen::MatrixXd PcaSpace::project_rows(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw ShapeError("pca project: dimension mismatch");
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaSpace::reconstruct_rows(const Eigen::MatrixXd& z) const {
  if (z.cols() != components.rows()) throw ShapeError("pca reconstruct: dimension mismatch");
  return (z * components).rowwise() + mean.transpose();
}

PcaSpace fit_pca(const Eigen::MatrixXd& frames, double variance_target) {
  if (frames.rows() < 1 || frames.cols() < 1)
    throw ShapeError("fit_pca: need at least one frame and one dimension");
  if (!(variance_target > 0.0) || variance_target > 1.0)
    throw ConfigError("fit_pca: variance target must be in (0, 1]");

  const Eigen::Index n = frames.rows(), d = frames.cols();
  PcaSpace space;
  space.mean = frames.colwise().mean();
  Eigen::MatrixXd centered = frames.rowwise() - space.mean.transpose();
  Eigen::MatrixXd cov =
      n > 1 ? Eigen::MatrixXd((centered.transpose() * centered) / static_cast<double>(n - 1))
            : Eigen::MatrixXd::Zero(d, d);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("fit_pca: eigensolver failed");

  // Ascending eigenvalues; walk from the back.
  Eigen::VectorXd evals = solver.eigenvalues().cwiseMax(0.0);
  double total = evals.sum();

  if (total <= 0.0) {
    std::cerr << "warning: pca input has zero variance, keeping one null component\n";
    space.components = Eigen::MatrixXd::Zero(1, d);
    space.components(0, 0) = 1.0;
    space.explained_variance_ratio = Eigen::VectorXd::Ones(1);
    return space;
  }

  std::vector<double> ratios;
  std::vector<Eigen::VectorXd> comps;
  double cum = 0.0;
  bool reached = false;
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    double ratio = evals[i] / total;
    if (ratio <= 0.0) break;  // remaining spectrum is numerically null
    comps.push_back(solver.eigenvectors().col(i));
    ratios.push_back(ratio);
    cum += ratio;
    if (cum >= variance_target - 1e-12) {
      reached = true;
      break;
    }
  }
  if (!reached)
    std::cerr << "warning: pca variance target " << variance_target
              << " unreachable on rank-deficient data, kept " << comps.size()
              << " components (" << cum << ")\n";

  space.components.resize(static_cast<Eigen::Index>(comps.size()), d);
  space.explained_variance_ratio.resize(static_cast<Eigen::Index>(ratios.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    Eigen::VectorXd v = comps[k];
    // Deterministic sign: the largest-magnitude coefficient is positive.
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0) v = -v;
    space.components.row(static_cast<Eigen::Index>(k)) = v.transpose();
    space.explained_variance_ratio[static_cast<Eigen::Index>(k)] = ratios[k];
  }
  return space;
}

void save_pca(const std::filesystem::path& bin_path, const PcaSpace& space) {
  ArraySidecar meta;
  meta.mean.assign(space.mean.data(), space.mean.data() + space.mean.size());
  meta.explained_variance_ratio.assign(
      space.explained_variance_ratio.data(),
      space.explained_variance_ratio.data() + space.explained_variance_ratio.size());
  meta.note = "pca components, one row per component";
  save_array(bin_path, space.components, std::move(meta));
}

PcaSpace load_pca(const std::filesystem::path& bin_path) {
  LoadedArray arr = load_array(bin_path);
  if (arr.meta.shape.size() != 2) throw SchemaError("pca file must be 2-D");
  PcaSpace space;
  space.components = arr.data;
  if (arr.meta.mean.size() != static_cast<std::size_t>(space.components.cols()))
    throw SchemaError("pca sidecar mean has wrong dimension");
  if (arr.meta.explained_variance_ratio.size() !=
      static_cast<std::size_t>(space.components.rows()))
    throw SchemaError("pca sidecar ratios have wrong count");
  space.mean = Eigen::Map<const Eigen::VectorXd>(arr.meta.mean.data(),
                                                 static_cast<Eigen::Index>(arr.meta.mean.size()));
  space.explained_variance_ratio = Eigen::Map<const Eigen::VectorXd>(
      arr.meta.explained_variance_ratio.data(),
      static_cast<Eigen::Index>(arr.meta.explained_variance_ratio.size()));
  return space;
}

}  // namespace gesticulate
