#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace pcanet {

inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;

double selu(double x);
double selu_derivative(double x);

/// Dense network: affine layers with SELU between them, affine output.
struct MlpModel {
  std::vector<int> dims;  ///< [d_in, hidden..., d_out]
  std::vector<Eigen::MatrixXd> weights;  ///< weights[l] is dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

/// Affine latent map s -> matrix * s + bias.
struct LinearModel {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd bias;

  int input_dim() const { return static_cast<int>(matrix.cols()); }
  int output_dim() const { return static_cast<int>(matrix.rows()); }
};

using Regressor = std::variant<MlpModel, LinearModel>;

/// Hidden widths of the reference architecture.
std::vector<int> default_hidden_widths();

/// Gaussian weights with variance 1/fan_in, zero biases.
MlpModel init_mlp(const std::vector<int>& dims, std::uint64_t seed);

/// Column-wise forward pass (d_in x B -> d_out x B).
Eigen::MatrixXd predict_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd predict_batch(const LinearModel& model, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd predict_batch(const Regressor& model, const Eigen::MatrixXd& inputs);

Eigen::VectorXd predict(const MlpModel& model, const Eigen::VectorXd& input);
Eigen::VectorXd predict(const LinearModel& model, const Eigen::VectorXd& input);
Eigen::VectorXd predict(const Regressor& model, const Eigen::VectorXd& input);

int input_dim(const Regressor& model);
int output_dim(const Regressor& model);

/// Mean over all entries of (prediction - target)^2.
double mse_loss(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Loss and its gradient by backpropagation; the gradient has the model's shape.
double loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         MlpModel& gradient);

/// Least-squares affine fit on columns of inputs/targets via the normal
/// equations with 1e-12 relative diagonal damping.
LinearModel fit_linear(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// One Nesterov step in lookahead-gradient form:
/// v <- m v - lr grad(theta + m v), theta <- theta + v.
void nesterov_step(Eigen::VectorXd& theta, Eigen::VectorXd& velocity, double momentum, double learning_rate,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient);

struct TrainConfig {
  std::vector<double> learning_rates{1e-2, 5e-3, 1e-3, 5e-4, 1e-4};  ///< tried largest first
  double momentum = 0.99;
  int batch_size = 64;
  int epochs = 500;
  std::uint64_t seed = 0;
  double blowup_factor = 10.0;  ///< blow-up if loss > factor * initial loss
  /// Evaluate the validation metric every this many epochs (0 disables it).
  int eval_every = 1;
};

void validate(const TrainConfig& config, int sample_count);

/// One row of the training log. test_metric is NaN when not evaluated.
struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double test_metric = 0.0;
};

struct RateAttempt {
  double learning_rate = 0.0;
  bool blew_up = false;
  int failed_epoch = -1;
  double last_loss = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochRecord> history;  ///< epoch 0 is the loss before training
  double learning_rate = 0.0;
  std::vector<RateAttempt> attempts;
};

using ValidationMetric = std::function<double(const MlpModel&)>;

/// Minibatch SGD with Nesterov momentum on the mean squared latent error,
/// restarting from `model` with the next smaller learning rate on blow-up.
TrainResult train_mlp(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                      const TrainConfig& config, const ValidationMetric& validation = {});

}  // namespace pcanet
