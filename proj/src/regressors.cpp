#include "pcanet/regressors.hpp"

#include "pcanet/error.hpp"
#include "pcanet/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace pcanet {

double selu(double x) { return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x); }

double selu_derivative(double x) { return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x); }

std::size_t MlpModel::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) count += weights[l].size() + biases[l].size();
  return count;
}

std::vector<int> default_hidden_widths() { return {500, 1000, 2000, 1000, 500}; }

MlpModel init_mlp(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  for (int w : dims) {
    if (w < 1) throw ConfigError("layer widths must be positive");
  }
  MlpModel model;
  model.dims = dims;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Eigen::MatrixXd w(dims[l + 1], fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  return model;
}

namespace {

void require_input_rows(int expected, Eigen::Index rows) {
  if (rows != expected) {
    throw ShapeError("regressor expects inputs of dimension " + std::to_string(expected) + ", got " +
                     std::to_string(rows));
  }
}

// Activations a_0..a_L and pre-activations z_1..z_L of a forward pass.
struct Trace {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
};

Trace forward_trace(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  Trace t;
  const std::size_t layers = model.layer_count();
  t.pre.resize(layers);
  t.post.resize(layers);
  const Eigen::MatrixXd* a = &inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    t.pre[l].noalias() = model.weights[l] * *a;
    t.pre[l].colwise() += model.biases[l];
    if (l + 1 < layers) {
      t.post[l] = t.pre[l].unaryExpr([](double x) { return selu(x); });
      a = &t.post[l];
    }
  }
  return t;
}

}  // namespace

Eigen::MatrixXd predict_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  require_input_rows(model.input_dim(), inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * a;
    z.colwise() += model.biases[l];
    if (l + 1 < model.layer_count()) {
      a = z.unaryExpr([](double x) { return selu(x); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::MatrixXd predict_batch(const LinearModel& model, const Eigen::MatrixXd& inputs) {
  require_input_rows(model.input_dim(), inputs.rows());
  Eigen::MatrixXd out = model.matrix * inputs;
  out.colwise() += model.bias;
  return out;
}

Eigen::MatrixXd predict_batch(const Regressor& model, const Eigen::MatrixXd& inputs) {
  return std::visit([&](const auto& m) { return predict_batch(m, inputs); }, model);
}

Eigen::VectorXd predict(const MlpModel& model, const Eigen::VectorXd& input) { return predict_batch(model, input); }
Eigen::VectorXd predict(const LinearModel& model, const Eigen::VectorXd& input) {
  return predict_batch(model, input);
}
Eigen::VectorXd predict(const Regressor& model, const Eigen::VectorXd& input) { return predict_batch(model, input); }

int input_dim(const Regressor& model) {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

int output_dim(const Regressor& model) {
  return std::visit([](const auto& m) { return m.output_dim(); }, model);
}

double mse_loss(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd pred = predict_batch(model, inputs);
  if (pred.rows() != targets.rows() || pred.cols() != targets.cols()) throw ShapeError("target shape mismatch");
  return (pred - targets).squaredNorm() / static_cast<double>(targets.size());
}

double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         MlpModel& gradient) {
  require_input_rows(model.input_dim(), inputs.rows());
  if (targets.rows() != model.output_dim() || targets.cols() != inputs.cols()) {
    throw ShapeError("target shape mismatch");
  }
  const Trace t = forward_trace(model, inputs);
  const std::size_t layers = model.layer_count();
  Eigen::MatrixXd delta = t.pre[layers - 1] - targets;
  const double loss = delta.squaredNorm() / static_cast<double>(targets.size());
  delta *= 2.0 / static_cast<double>(targets.size());

  gradient.dims = model.dims;
  gradient.weights.resize(layers);
  gradient.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd& a_prev = l == 0 ? inputs : t.post[l - 1];
    gradient.weights[l].noalias() = delta * a_prev.transpose();
    gradient.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = model.weights[l].transpose() * delta;
      delta = back.cwiseProduct(t.pre[l - 1].unaryExpr([](double x) { return selu_derivative(x); }));
    }
  }
  return loss;
}

LinearModel fit_linear(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const Eigen::Index n = inputs.cols();
  const Eigen::Index p = inputs.rows() + 1;
  if (targets.cols() != n) throw ShapeError("inputs and targets have different sample counts");
  if (n == 0) throw ConfigError("linear fit needs at least one sample");

  Eigen::MatrixXd design(n, p);
  design.leftCols(p - 1) = inputs.transpose();
  design.col(p - 1).setOnes();
  Eigen::MatrixXd normal = design.transpose() * design;
  const Eigen::MatrixXd rhs = design.transpose() * targets.transpose();
  const double damping = 1e-12 * normal.diagonal().maxCoeff();
  normal.diagonal().array() += damping > 0.0 ? damping : 1e-300;

  if (n < p) {
    warn("linear fit is underdetermined (" + std::to_string(n) + " samples, " + std::to_string(p) +
         " unknowns); solution selected by damping");
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (n >= p && ldlt.rcond() < 1e-11) {
    warn("linear fit design is rank deficient (rcond " + std::to_string(ldlt.rcond()) +
         "); solution selected by damping");
  }
  const Eigen::MatrixXd solution = ldlt.solve(rhs);  // p x d_out

  LinearModel model;
  model.matrix = solution.topRows(p - 1).transpose();
  model.bias = solution.row(p - 1).transpose();
  return model;
}

void nesterov_step(Eigen::VectorXd& theta, Eigen::VectorXd& velocity, double momentum, double learning_rate,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient) {
  const Eigen::VectorXd g = gradient(theta + momentum * velocity);
  velocity = momentum * velocity - learning_rate * g;
  theta += velocity;
}

void validate(const TrainConfig& config, int sample_count) {
  if (config.learning_rates.empty()) throw ConfigError("at least one learning rate is required");
  for (double r : config.learning_rates) {
    if (!(r > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (config.batch_size < 1 || config.batch_size > sample_count) {
    throw ConfigError("batch size " + std::to_string(config.batch_size) + " must lie in [1, " +
                      std::to_string(sample_count) + "]");
  }
  if (config.epochs < 0) throw ConfigError("epoch count must be non-negative");
  if (!(config.blowup_factor > 1.0)) throw ConfigError("blow-up factor must exceed 1");
}

namespace {

// theta <- theta + scale * other, layer by layer.
void axpy(MlpModel& theta, double scale, const MlpModel& other) {
  for (std::size_t l = 0; l < theta.layer_count(); ++l) {
    theta.weights[l] += scale * other.weights[l];
    theta.biases[l] += scale * other.biases[l];
  }
}

MlpModel zeros_like(const MlpModel& m) {
  MlpModel z = m;
  for (auto& w : z.weights) w.setZero();
  for (auto& b : z.biases) b.setZero();
  return z;
}

struct RunOutcome {
  bool blew_up = false;
  int failed_epoch = -1;
  double last_loss = 0.0;
};

RunOutcome run_training(MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                        const TrainConfig& config, double rate, double initial_loss, const ValidationMetric& validation,
                        std::vector<EpochRecord>& history) {
  const Eigen::Index n = inputs.cols();
  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  MlpModel velocity = zeros_like(model);
  MlpModel grad;
  Eigen::MatrixXd xb, yb;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(config.batch_size, n - start);
      xb.resize(inputs.rows(), count);
      yb.resize(targets.rows(), count);
      for (Eigen::Index k = 0; k < count; ++k) {
        xb.col(k) = inputs.col(order[static_cast<std::size_t>(start + k)]);
        yb.col(k) = targets.col(order[static_cast<std::size_t>(start + k)]);
      }
      // Lookahead form with theta stored in place:
      // theta += m v; g = grad(theta); theta -= lr g; v = m v - lr g.
      axpy(model, config.momentum, velocity);
      const double batch_loss = loss_and_gradient(model, xb, yb, grad);
      axpy(model, -rate, grad);
      for (std::size_t l = 0; l < velocity.layer_count(); ++l) {
        velocity.weights[l] = config.momentum * velocity.weights[l] - rate * grad.weights[l];
        velocity.biases[l] = config.momentum * velocity.biases[l] - rate * grad.biases[l];
      }
      loss_sum += batch_loss * static_cast<double>(count);
      seen += count;
    }
    const double epoch_loss = loss_sum / static_cast<double>(seen);
    if (!std::isfinite(epoch_loss) || epoch_loss > config.blowup_factor * initial_loss) {
      return {true, epoch, epoch_loss};
    }
    const bool evaluate = validation && config.eval_every > 0 &&
                          (epoch % config.eval_every == 0 || epoch == config.epochs);
    history.push_back({epoch, epoch_loss, evaluate ? validation(model) : nan});
  }
  return {false, -1, history.empty() ? initial_loss : history.back().train_mse};
}

}  // namespace

TrainResult train_mlp(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                      const TrainConfig& config, const ValidationMetric& validation) {
  validate(config, static_cast<int>(inputs.cols()));
  require_input_rows(model.input_dim(), inputs.rows());
  if (targets.rows() != model.output_dim() || targets.cols() != inputs.cols()) {
    throw ShapeError("target shape mismatch");
  }
  std::vector<double> rates = config.learning_rates;
  std::sort(rates.begin(), rates.end(), std::greater<>());

  const double initial_loss = mse_loss(model, inputs, targets);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  TrainResult result;
  for (double rate : rates) {
    MlpModel candidate = model;
    std::vector<EpochRecord> history{{0, initial_loss, validation ? validation(model) : nan}};
    const RunOutcome outcome = run_training(candidate, inputs, targets, config, rate, initial_loss, validation, history);
    result.attempts.push_back({rate, outcome.blew_up, outcome.failed_epoch, outcome.last_loss});
    if (!outcome.blew_up) {
      result.model = std::move(candidate);
      result.history = std::move(history);
      result.learning_rate = rate;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "every learning rate blew up:";
  for (const RateAttempt& a : result.attempts) {
    msg << " lr=" << a.learning_rate << " (epoch " << a.failed_epoch << ", loss " << a.last_loss << ")";
  }
  throw NumericalError(msg.str());
}

}  // namespace pcanet
