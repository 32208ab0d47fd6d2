#pragma once

#include "pcanet/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace pcanet {

/// Non-centered PCA of a set of grid functions. The basis is stored column-wise
/// as grid values (size x d); eigenvalues hold the full empirical spectrum.
struct PcaModel {
  Grid grid;
  InnerProductKind inner_product = InnerProductKind::weighted;
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
  /// max |<phi_i, phi_j> - delta_ij| measured on this grid after a transfer.
  std::optional<double> transfer_gram_residual;

  int dimension() const { return static_cast<int>(basis.cols()); }
  GridFunction basis_function(int j) const { return GridFunction(grid, basis.col(j)); }
};

/// Snapshot-method PCA: eigendecomposition of the N x N Gram matrix
/// <u_i, u_j>/N, lifted back to grid functions. Keeps the top d modes.
PcaModel fit_pca(const std::vector<GridFunction>& data, int d,
                 InnerProductKind inner_product = InnerProductKind::weighted);

/// Same as fit_pca for data already stacked column-wise on `grid`.
PcaModel fit_pca(const Grid& grid, const Eigen::MatrixXd& snapshots, int d,
                 InnerProductKind inner_product = InnerProductKind::weighted);

Eigen::VectorXd encode(const PcaModel& model, const GridFunction& u);
/// Column-wise encoding of stacked snapshots (d x N).
Eigen::MatrixXd encode_columns(const PcaModel& model, const Eigen::MatrixXd& snapshots);

GridFunction decode(const PcaModel& model, const Eigen::VectorXd& latent);

/// Orthogonal projection decode(encode(u)).
GridFunction project(const PcaModel& model, const GridFunction& u);

/// (1/N) sum_j ||u_j - P u_j||^2.
double empirical_projection_error(const PcaModel& model, const std::vector<GridFunction>& data);

/// Sum of eigenvalues beyond index d.
double eigenvalue_tail(const PcaModel& model);

/// max |<phi_i, phi_j> - delta_ij| on the model's grid.
double gram_residual(const PcaModel& model);

/// Moves the basis to another resolution (spline interpolation when finer,
/// nested subsampling when coarser). The basis is not re-orthonormalized;
/// the resulting Gram residual is recorded on the returned model.
PcaModel transfer_basis(const PcaModel& model, int target_n);

/// Keeps only the first d basis functions.
PcaModel truncate(const PcaModel& model, int d);

}  // namespace pcanet
