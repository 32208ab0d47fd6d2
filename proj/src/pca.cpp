#include "pcanet/pca.hpp"

#include "pcanet/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace pcanet {

namespace {

constexpr double kRankTolerance = 1e-14;

void require_grid(const PcaModel& model, const GridFunction& u) {
  if (u.grid() != model.grid) {
    throw ShapeError("function on resolution " + std::to_string(u.resolution()) + " does not match PCA grid " +
                     std::to_string(model.grid.n));
  }
}

// Flips v so that its entry of largest magnitude is positive.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

}  // namespace

PcaModel fit_pca(const Grid& grid, const Eigen::MatrixXd& snapshots, int d, InnerProductKind inner_product) {
  const Eigen::Index n_samples = snapshots.cols();
  if (d < 1) throw ConfigError("PCA dimension must be at least 1");
  if (d > n_samples) {
    throw ConfigError("PCA dimension " + std::to_string(d) + " exceeds the sample count " + std::to_string(n_samples));
  }
  if (static_cast<std::size_t>(snapshots.rows()) != grid.size()) throw ShapeError("snapshot length does not match grid");

  const Eigen::VectorXd w = inner_product_weights(grid, inner_product);
  const Eigen::MatrixXd weighted = w.asDiagonal() * snapshots;
  Eigen::MatrixXd gram(n_samples, n_samples);
  gram.triangularView<Eigen::Lower>() = snapshots.transpose() * weighted;
  gram = gram.selfadjointView<Eigen::Lower>();
  gram /= static_cast<double>(n_samples);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericalError("Gram eigendecomposition failed");

  // Descending order; equal eigenvalues ordered by the sign-conventioned first
  // component of their eigenvector.
  Eigen::MatrixXd vectors = eig.eigenvectors();
  for (Eigen::Index j = 0; j < n_samples; ++j) apply_sign_convention(vectors.col(j));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double la = eig.eigenvalues()[a];
    const double lb = eig.eigenvalues()[b];
    if (la != lb) return la > lb;
    return vectors(0, a) > vectors(0, b);
  });

  PcaModel model;
  model.grid = grid;
  model.inner_product = inner_product;
  model.eigenvalues.resize(n_samples);
  for (Eigen::Index j = 0; j < n_samples; ++j) {
    model.eigenvalues[j] = std::max(0.0, eig.eigenvalues()[order[static_cast<std::size_t>(j)]]);
  }
  const double top = model.eigenvalues[0];
  model.basis.resize(snapshots.rows(), d);
  for (int j = 0; j < d; ++j) {
    const double lambda = model.eigenvalues[j];
    if (!(lambda > kRankTolerance * top)) {
      std::ostringstream msg;
      msg << "rank-deficient data: eigenvalue " << j + 1 << " (" << lambda << ") is below " << kRankTolerance
          << " times the largest (" << top << "); reduce d or add samples";
      throw NumericalError(msg.str());
    }
    model.basis.col(j) = snapshots * vectors.col(order[static_cast<std::size_t>(j)]) /
                         std::sqrt(static_cast<double>(n_samples) * lambda);
    apply_sign_convention(model.basis.col(j));
  }
  return model;
}

PcaModel fit_pca(const std::vector<GridFunction>& data, int d, InnerProductKind inner_product) {
  if (data.empty()) throw ConfigError("PCA needs at least one sample");
  const Grid grid = data.front().grid();
  Eigen::MatrixXd snapshots(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].grid() != grid) throw ShapeError("PCA samples must share one grid");
    snapshots.col(static_cast<Eigen::Index>(i)) = data[i].values();
  }
  return fit_pca(grid, snapshots, d, inner_product);
}

Eigen::VectorXd encode(const PcaModel& model, const GridFunction& u) {
  require_grid(model, u);
  const Eigen::VectorXd w = inner_product_weights(model.grid, model.inner_product);
  return model.basis.transpose() * w.cwiseProduct(u.values());
}

Eigen::MatrixXd encode_columns(const PcaModel& model, const Eigen::MatrixXd& snapshots) {
  if (static_cast<std::size_t>(snapshots.rows()) != model.grid.size()) {
    throw ShapeError("snapshot length does not match PCA grid");
  }
  const Eigen::VectorXd w = inner_product_weights(model.grid, model.inner_product);
  return (w.asDiagonal() * model.basis).transpose() * snapshots;
}

GridFunction decode(const PcaModel& model, const Eigen::VectorXd& latent) {
  if (latent.size() != model.basis.cols()) {
    throw ShapeError("latent vector has length " + std::to_string(latent.size()) + ", expected " +
                     std::to_string(model.basis.cols()));
  }
  return GridFunction(model.grid, model.basis * latent);
}

GridFunction project(const PcaModel& model, const GridFunction& u) { return decode(model, encode(model, u)); }

double empirical_projection_error(const PcaModel& model, const std::vector<GridFunction>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const GridFunction& u : data) {
    const GridFunction r = u - project(model, u);
    total += inner_product(r, r, model.inner_product);
  }
  return total / static_cast<double>(data.size());
}

double eigenvalue_tail(const PcaModel& model) {
  return model.eigenvalues.tail(model.eigenvalues.size() - model.dimension()).sum();
}

double gram_residual(const PcaModel& model) {
  const Eigen::VectorXd w = inner_product_weights(model.grid, model.inner_product);
  const Eigen::MatrixXd g = model.basis.transpose() * w.asDiagonal() * model.basis;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

PcaModel transfer_basis(const PcaModel& model, int target_n) {
  const Grid target{model.grid.kind, target_n};
  validate(target);
  if (target_n < model.grid.n && nesting_stride(model.grid, target) == 0) {
    throw ShapeError("coarse resolution " + std::to_string(target_n) + " is not nested in " +
                     std::to_string(model.grid.n));
  }
  PcaModel out;
  out.grid = target;
  out.inner_product = model.inner_product;
  out.eigenvalues = model.eigenvalues;
  out.basis.resize(static_cast<Eigen::Index>(target.size()), model.basis.cols());
  for (int j = 0; j < model.dimension(); ++j) {
    out.basis.col(j) = resample(model.basis_function(j), target_n).values();
  }
  out.transfer_gram_residual = gram_residual(out);
  return out;
}

PcaModel truncate(const PcaModel& model, int d) {
  if (d < 1 || d > model.dimension()) throw ConfigError("cannot truncate PCA model to dimension " + std::to_string(d));
  PcaModel out = model;
  out.basis = model.basis.leftCols(d);
  return out;
}

}  // namespace pcanet
