#pragma once

#include "pcanet/grid.hpp"
#include "pcanet/pca.hpp"
#include "pcanet/pde.hpp"
#include "pcanet/random_fields.hpp"
#include "pcanet/regressors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <vector>

namespace pcanet {

/// Per-coordinate z-scoring of input latent codes.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardization identity(int d);
  static Standardization fit(const Eigen::MatrixXd& latents);
  /// Centers each coordinate and divides all of them by one common RMS, so
  /// the relative weight of the coordinates in a squared loss is unchanged.
  static Standardization fit_uniform(const Eigen::MatrixXd& latents);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& latents) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& standardized) const;
};

/// How input codes are normalized before the regressor: not at all, z-scored
/// per coordinate, or centered and divided by one common RMS.
enum class InputScaling { none, zscore, uniform };

std::string_view to_string(InputScaling scaling);
InputScaling input_scaling_from_string(std::string_view name);
Standardization fit_scaling(InputScaling scaling, const Eigen::MatrixXd& latents);

/// decode_out o unscale o regressor o standardize o encode_in.
struct Surrogate {
  PcaModel pca_in;
  PcaModel pca_out;
  Regressor regressor;
  Standardization standardization;
  Standardization output_scaling;
};

/// Throws ShapeError when the pieces do not compose.
void validate(const Surrogate& surrogate);

GridFunction predict_function(const Surrogate& surrogate, const GridFunction& x);
FunctionBatch predict_functions(const Surrogate& surrogate, const FunctionBatch& inputs);

/// Moves both PCA bases to another resolution; the regressor is reused as-is.
Surrogate transfer_surrogate(const Surrogate& surrogate, int target_n);

struct RelativeError {
  double mean = 0.0;
  int evaluated = 0;
  int skipped = 0;  ///< targets with zero norm
};

/// Mean of ||prediction - target|| / ||target||; zero-norm targets are skipped
/// with a warning.
RelativeError relative_error(const FunctionBatch& predictions, const FunctionBatch& targets,
                             InnerProductKind kind = InnerProductKind::weighted);

RelativeError relative_test_error(const Surrogate& surrogate, const FunctionBatch& inputs,
                                  const FunctionBatch& targets);

enum class RegressorKind { mlp, linear };

std::string_view to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(std::string_view name);

struct SurrogateFitOptions {
  int d_in = 20;
  int d_out = 20;
  RegressorKind regressor = RegressorKind::mlp;
  std::vector<int> hidden_widths = default_hidden_widths();
  TrainConfig train;
  InputScaling input_scaling = InputScaling::uniform;
  /// Train the network on centered, uniformly rescaled output codes.
  bool scale_outputs = true;
  InnerProductKind inner_product = InnerProductKind::weighted;
};

struct SurrogateFit {
  Surrogate surrogate;
  std::vector<EpochRecord> history;  ///< empty for the linear regressor
  double learning_rate = 0.0;
  std::vector<RateAttempt> attempts;
};

/// Fits both PCAs on the training pairs, then the latent regressor. When a
/// validation set is supplied its relative error is logged per epoch.
SurrogateFit fit_surrogate(const FunctionBatch& x_train, const FunctionBatch& y_train,
                           const SurrogateFitOptions& options, const FunctionBatch* x_valid = nullptr,
                           const FunctionBatch* y_valid = nullptr);

using ForwardMap = std::function<GridFunction(const GridFunction&)>;

/// Regressor-free error of P_out o forward o P_in, where P denotes the PCA
/// projections; the ceiling any latent regressor can reach.
RelativeError psi_pca_error(const PcaModel& pca_in, const PcaModel& pca_out, const ForwardMap& forward,
                            const FunctionBatch& inputs, const FunctionBatch& targets);

/// Reduced basis Galerkin surrogate on a PCA basis of Darcy solutions.
/// Basis gradients are precomputed; each solve costs O(d^2 K + d^3).
class ReducedBasis {
 public:
  explicit ReducedBasis(PcaModel basis);

  const PcaModel& basis() const { return basis_; }
  int dimension() const { return basis_.dimension(); }

  /// Reduced stiffness A_ij = <a grad phi_i, grad phi_j>.
  Eigen::MatrixXd stiffness(const GridFunction& a) const;
  /// Reduced load b_i = <f, phi_i>.
  Eigen::VectorXd load(const GridFunction& f) const;
  GridFunction solve(const GridFunction& a, const GridFunction& f) const;

 private:
  PcaModel basis_;
  Eigen::MatrixXd grad_s1_;
  Eigen::MatrixXd grad_s2_;
  Eigen::VectorXd weights_;
};

GridFunction rb_galerkin_solve(const PcaModel& pca_out, const GridFunction& a, const GridFunction& f);

/// Discrete gradient components: centered in the interior, second-order
/// one-sided on the boundary.
std::pair<GridFunction, GridFunction> grid_gradient(const GridFunction& u);

/// Truncated Taylor expansion of the linear Poisson map: precomputes
/// eta_j solving -Laplacian eta_j = phi_j for the first K coefficient modes.
class TaylorPoisson {
 public:
  TaylorPoisson(const MeasureSpec& model_spec, int truncation, int n, const CgOptions& options = {});

  int truncation() const { return static_cast<int>(etas_.cols()); }
  const Grid& grid() const { return grid_; }
  /// sum_{j <= K} xi_j eta_j; coefficients beyond K are ignored.
  GridFunction predict(const Eigen::VectorXd& xi) const;
  FunctionBatch predict_batch(const Eigen::MatrixXd& xi_columns) const;
  /// Column j is eta_j.
  const Eigen::MatrixXd& etas() const { return etas_; }

 private:
  Grid grid_;
  Eigen::MatrixXd etas_;
};

}  // namespace pcanet
