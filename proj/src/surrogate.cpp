#include "pcanet/surrogate.hpp"

#include "pcanet/error.hpp"
#include "pcanet/log.hpp"

#include <cmath>
#include <string>

namespace pcanet {

Standardization Standardization::identity(int d) {
  return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

Standardization Standardization::fit(const Eigen::MatrixXd& latents) {
  Standardization s;
  const double count = static_cast<double>(latents.cols());
  s.mean = latents.rowwise().mean();
  s.scale = ((latents.colwise() - s.mean).rowwise().squaredNorm() / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale[i] > 0.0)) s.scale[i] = 1.0;
  }
  return s;
}

Standardization Standardization::fit_uniform(const Eigen::MatrixXd& latents) {
  Standardization s;
  s.mean = latents.rowwise().mean();
  const double rms = std::sqrt((latents.colwise() - s.mean).squaredNorm() / static_cast<double>(latents.size()));
  s.scale = Eigen::VectorXd::Constant(latents.rows(), rms > 0.0 ? rms : 1.0);
  return s;
}

Eigen::MatrixXd Standardization::invert(const Eigen::MatrixXd& standardized) const {
  if (standardized.rows() != mean.size()) throw ShapeError("standardization dimension mismatch");
  return (scale.asDiagonal() * standardized).colwise() + mean;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& latents) const {
  if (latents.rows() != mean.size()) throw ShapeError("standardization dimension mismatch");
  return scale.cwiseInverse().asDiagonal() * (latents.colwise() - mean);
}

std::string_view to_string(InputScaling scaling) {
  switch (scaling) {
    case InputScaling::none: return "none";
    case InputScaling::zscore: return "zscore";
    case InputScaling::uniform: return "uniform";
  }
  return "?";
}

InputScaling input_scaling_from_string(std::string_view name) {
  if (name == "none") return InputScaling::none;
  if (name == "zscore") return InputScaling::zscore;
  if (name == "uniform") return InputScaling::uniform;
  throw ConfigError("unknown input scaling '" + std::string(name) + "' (expected none, zscore or uniform)");
}

Standardization fit_scaling(InputScaling scaling, const Eigen::MatrixXd& latents) {
  switch (scaling) {
    case InputScaling::none: return Standardization::identity(static_cast<int>(latents.rows()));
    case InputScaling::zscore: return Standardization::fit(latents);
    case InputScaling::uniform: return Standardization::fit_uniform(latents);
  }
  throw ConfigError("unknown input scaling");
}

void validate(const Surrogate& s) {
  if (input_dim(s.regressor) != s.pca_in.dimension()) {
    throw ShapeError("regressor input dimension " + std::to_string(input_dim(s.regressor)) +
                     " does not match input PCA dimension " + std::to_string(s.pca_in.dimension()));
  }
  if (output_dim(s.regressor) != s.pca_out.dimension()) {
    throw ShapeError("regressor output dimension " + std::to_string(output_dim(s.regressor)) +
                     " does not match output PCA dimension " + std::to_string(s.pca_out.dimension()));
  }
  if (s.standardization.mean.size() != s.pca_in.dimension()) throw ShapeError("standardization dimension mismatch");
  if (s.output_scaling.mean.size() != s.pca_out.dimension()) throw ShapeError("output scaling dimension mismatch");
}

FunctionBatch predict_functions(const Surrogate& s, const FunctionBatch& inputs) {
  validate(s);
  if (inputs.grid != s.pca_in.grid) throw ShapeError("inputs are not on the surrogate's input grid");
  const Eigen::MatrixXd latent = s.standardization.apply(encode_columns(s.pca_in, inputs.columns));
  const Eigen::MatrixXd out = s.output_scaling.invert(predict_batch(s.regressor, latent));
  return FunctionBatch(s.pca_out.grid, s.pca_out.basis * out);
}

GridFunction predict_function(const Surrogate& s, const GridFunction& x) {
  return predict_functions(s, FunctionBatch(x.grid(), x.values())).at(0);
}

Surrogate transfer_surrogate(const Surrogate& s, int target_n) {
  Surrogate out = s;
  out.pca_in = transfer_basis(s.pca_in, target_n);
  out.pca_out = transfer_basis(s.pca_out, target_n);
  return out;
}

RelativeError relative_error(const FunctionBatch& predictions, const FunctionBatch& targets, InnerProductKind kind) {
  if (predictions.grid != targets.grid || predictions.count() != targets.count()) {
    throw ShapeError("predictions and targets differ in grid or count");
  }
  if (targets.count() == 0) throw UsageError("relative error needs a non-empty test set");
  const Eigen::VectorXd w = inner_product_weights(targets.grid, kind);
  RelativeError r;
  double total = 0.0;
  for (int i = 0; i < targets.count(); ++i) {
    const double denom = std::sqrt(w.dot(targets.columns.col(i).cwiseAbs2()));
    if (!(denom > 0.0)) {
      ++r.skipped;
      continue;
    }
    const double num = std::sqrt(w.dot((predictions.columns.col(i) - targets.columns.col(i)).cwiseAbs2()));
    total += num / denom;
    ++r.evaluated;
  }
  if (r.skipped > 0) warn("skipped " + std::to_string(r.skipped) + " zero-norm targets in relative error");
  r.mean = r.evaluated > 0 ? total / r.evaluated : 0.0;
  return r;
}

RelativeError relative_test_error(const Surrogate& s, const FunctionBatch& inputs, const FunctionBatch& targets) {
  return relative_error(predict_functions(s, inputs), targets, s.pca_out.inner_product);
}

std::string_view to_string(RegressorKind kind) { return kind == RegressorKind::mlp ? "mlp" : "linear"; }

RegressorKind regressor_kind_from_string(std::string_view name) {
  if (name == "mlp" || name == "nn") return RegressorKind::mlp;
  if (name == "linear") return RegressorKind::linear;
  throw ConfigError("unknown regressor '" + std::string(name) + "'");
}

SurrogateFit fit_surrogate(const FunctionBatch& x_train, const FunctionBatch& y_train, const SurrogateFitOptions& options,
                           const FunctionBatch* x_valid, const FunctionBatch* y_valid) {
  if (x_train.count() != y_train.count()) throw ShapeError("input and output sample counts differ");
  SurrogateFit fit;
  Surrogate& s = fit.surrogate;
  s.pca_in = fit_pca(x_train.grid, x_train.columns, options.d_in, options.inner_product);
  s.pca_out = fit_pca(y_train.grid, y_train.columns, options.d_out, options.inner_product);

  const Eigen::MatrixXd latent_in = encode_columns(s.pca_in, x_train.columns);
  const Eigen::MatrixXd latent_out = encode_columns(s.pca_out, y_train.columns);
  s.standardization = fit_scaling(options.input_scaling, latent_in);
  const Eigen::MatrixXd inputs = s.standardization.apply(latent_in);
  s.output_scaling = options.scale_outputs && options.regressor == RegressorKind::mlp
                         ? Standardization::fit_uniform(latent_out)
                         : Standardization::identity(options.d_out);
  const Eigen::MatrixXd targets = s.output_scaling.apply(latent_out);

  if (options.regressor == RegressorKind::linear) {
    s.regressor = fit_linear(inputs, targets);
    return fit;
  }

  std::vector<int> dims{options.d_in};
  dims.insert(dims.end(), options.hidden_widths.begin(), options.hidden_widths.end());
  dims.push_back(options.d_out);
  const MlpModel init = init_mlp(dims, options.train.seed);

  ValidationMetric metric;
  Eigen::MatrixXd valid_latent;
  if (x_valid && y_valid) {
    valid_latent = s.standardization.apply(encode_columns(s.pca_in, x_valid->columns));
    metric = [&, kind = options.inner_product](const MlpModel& m) {
      const FunctionBatch pred(s.pca_out.grid, s.pca_out.basis * s.output_scaling.invert(predict_batch(m, valid_latent)));
      return relative_error(pred, *y_valid, kind).mean;
    };
  }
  TrainResult trained = train_mlp(init, inputs, targets, options.train, metric);
  s.regressor = std::move(trained.model);
  fit.history = std::move(trained.history);
  fit.learning_rate = trained.learning_rate;
  fit.attempts = std::move(trained.attempts);
  return fit;
}

RelativeError psi_pca_error(const PcaModel& pca_in, const PcaModel& pca_out, const ForwardMap& forward,
                            const FunctionBatch& inputs, const FunctionBatch& targets) {
  Eigen::MatrixXd pred(static_cast<Eigen::Index>(pca_out.grid.size()), inputs.count());
  for (int i = 0; i < inputs.count(); ++i) {
    const GridFunction y = forward(project(pca_in, inputs.at(i)));
    pred.col(i) = project(pca_out, y).values();
  }
  return relative_error(FunctionBatch(pca_out.grid, std::move(pred)), targets, pca_out.inner_product);
}

std::pair<GridFunction, GridFunction> grid_gradient(const GridFunction& u) {
  if (u.kind() != DomainKind::box2d) throw ShapeError("gradients are defined on the box domain");
  const int n = u.resolution();
  if (n < 3) throw ShapeError("gradient needs resolution >= 3");
  const double h = u.grid().spacing();
  const auto derivative = [&](auto value, int k) {
    if (k == 0) return (-3.0 * value(0) + 4.0 * value(1) - value(2)) / (2.0 * h);
    if (k == n - 1) return (3.0 * value(n - 1) - 4.0 * value(n - 2) + value(n - 3)) / (2.0 * h);
    return (value(k + 1) - value(k - 1)) / (2.0 * h);
  };
  Eigen::VectorXd d1(static_cast<Eigen::Index>(u.size())), d2(static_cast<Eigen::Index>(u.size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index k = static_cast<Eigen::Index>(i) * n + j;
      d1[k] = derivative([&](int jj) { return u.at(i, jj); }, j);
      d2[k] = derivative([&](int ii) { return u.at(ii, j); }, i);
    }
  }
  return {GridFunction(u.grid(), std::move(d1)), GridFunction(u.grid(), std::move(d2))};
}

ReducedBasis::ReducedBasis(PcaModel basis) : basis_(std::move(basis)) {
  if (basis_.grid.kind != DomainKind::box2d) throw ShapeError("reduced basis requires a box-domain basis");
  const Eigen::Index size = static_cast<Eigen::Index>(basis_.grid.size());
  grad_s1_.resize(size, basis_.dimension());
  grad_s2_.resize(size, basis_.dimension());
  for (int j = 0; j < basis_.dimension(); ++j) {
    const auto [g1, g2] = grid_gradient(basis_.basis_function(j));
    grad_s1_.col(j) = g1.values();
    grad_s2_.col(j) = g2.values();
  }
  weights_ = quadrature_weights(basis_.grid);
}

Eigen::MatrixXd ReducedBasis::stiffness(const GridFunction& a) const {
  if (a.grid() != basis_.grid) throw ShapeError("coefficient grid does not match the reduced basis");
  if (!(a.values().minCoeff() > 0.0)) throw DomainError("Darcy coefficient must be positive at every node");
  const Eigen::VectorXd wa = weights_.cwiseProduct(a.values());
  Eigen::MatrixXd k = grad_s1_.transpose() * wa.asDiagonal() * grad_s1_;
  k.noalias() += grad_s2_.transpose() * wa.asDiagonal() * grad_s2_;
  return k;
}

Eigen::VectorXd ReducedBasis::load(const GridFunction& f) const {
  if (f.grid() != basis_.grid) throw ShapeError("forcing grid does not match the reduced basis");
  return basis_.basis.transpose() * weights_.cwiseProduct(f.values());
}

GridFunction ReducedBasis::solve(const GridFunction& a, const GridFunction& f) const {
  const Eigen::MatrixXd k = stiffness(a);
  const Eigen::VectorXd b = load(f);
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw NumericalError("reduced stiffness matrix is singular");
  return decode(basis_, llt.solve(b));
}

GridFunction rb_galerkin_solve(const PcaModel& pca_out, const GridFunction& a, const GridFunction& f) {
  return ReducedBasis(pca_out).solve(a, f);
}

TaylorPoisson::TaylorPoisson(const MeasureSpec& model_spec, int truncation, int n, const CgOptions& options)
    : grid_{DomainKind::box2d, n} {
  const std::vector<CoeffMode> modes = ordered_coeff_modes(model_spec);
  if (truncation < 0 || static_cast<std::size_t>(truncation) > modes.size()) {
    throw ConfigError("Taylor truncation " + std::to_string(truncation) + " exceeds the available modes");
  }
  etas_.resize(static_cast<Eigen::Index>(grid_.size()), truncation);
  for (int j = 0; j < truncation; ++j) {
    etas_.col(j) = solve_poisson(coeff_mode_function(modes[static_cast<std::size_t>(j)], n), options).values();
  }
}

GridFunction TaylorPoisson::predict(const Eigen::VectorXd& xi) const {
  return predict_batch(xi).at(0);
}

FunctionBatch TaylorPoisson::predict_batch(const Eigen::MatrixXd& xi_columns) const {
  const int k = truncation();
  if (xi_columns.rows() < k) {
    throw ShapeError("need at least " + std::to_string(k) + " coefficients, got " + std::to_string(xi_columns.rows()));
  }
  return FunctionBatch(grid_, etas_ * xi_columns.topRows(k));
}

}  // namespace pcanet
