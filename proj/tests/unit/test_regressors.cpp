#include "pcanet/error.hpp"
#include "pcanet/regressors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pcanet;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace

TEST_CASE("selu values") {
  CHECK(selu(0.0) == 0.0);
  CHECK(selu(1.0) == doctest::Approx(kSeluLambda).epsilon(1e-15));
  CHECK(selu(-50.0) == doctest::Approx(-kSeluLambda * kSeluAlpha).epsilon(1e-12));
  CHECK(selu(-1.0) == doctest::Approx(kSeluLambda * kSeluAlpha * (std::exp(-1.0) - 1.0)));
  for (double x : {-2.0, -0.3, 0.4, 3.0}) {
    const double fd = (selu(x + 1e-6) - selu(x - 1e-6)) / 2e-6;
    CHECK(selu_derivative(x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("initialization") {
  const MlpModel m = init_mlp({400, 300, 5}, 11);
  REQUIRE(m.layer_count() == 2);
  CHECK(m.weights[0].rows() == 300);
  CHECK(m.weights[0].cols() == 400);
  CHECK(m.parameter_count() == 400 * 300 + 300 + 300 * 5 + 5);
  for (std::size_t l = 0; l < 2; ++l) {
    const auto& w = m.weights[l];
    const double var = (w.array() - w.mean()).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(std::abs(var * m.dims[l] - 1.0) < 0.2);
    CHECK(m.biases[l].cwiseAbs().maxCoeff() == 0.0);
  }
  const MlpModel again = init_mlp({400, 300, 5}, 11);
  CHECK(again.weights[1] == m.weights[1]);
  CHECK(init_mlp({400, 300, 5}, 12).weights[1] != m.weights[1]);
  CHECK_THROWS_AS(init_mlp({3}, 1), ConfigError);
  CHECK_THROWS_AS(init_mlp({3, 0, 1}, 1), ConfigError);
  CHECK(default_hidden_widths() == std::vector<int>{500, 1000, 2000, 1000, 500});
}

TEST_CASE("zero weights give the output bias") {
  MlpModel m = init_mlp({3, 4, 2}, 1);
  for (auto& w : m.weights) w.setZero();
  m.biases.back() << 1.5, -2.0;
  const Eigen::VectorXd y = predict(m, Eigen::Vector3d(1, 2, 3));
  CHECK(y[0] == 1.5);
  CHECK(y[1] == -2.0);
  CHECK_THROWS_AS(predict(m, Eigen::Vector2d(1, 2)), ShapeError);
}

TEST_CASE("backpropagation matches finite differences") {
  const MlpModel m = init_mlp({3, 5, 4, 2}, 7);
  const Eigen::MatrixXd x = gaussian(3, 10, 1);
  const Eigen::MatrixXd y = gaussian(2, 10, 2);
  MlpModel grad;
  const double loss = loss_and_gradient(m, x, y, grad);
  CHECK(loss == doctest::Approx(mse_loss(m, x, y)).epsilon(1e-14));
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    for (Eigen::Index k = 0; k < m.weights[l].size(); ++k) {
      MlpModel p = m, q = m;
      p.weights[l].data()[k] += h;
      q.weights[l].data()[k] -= h;
      const double fd = (mse_loss(p, x, y) - mse_loss(q, x, y)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad.weights[l].data()[k]) / std::max(1.0, std::abs(fd)));
    }
    for (Eigen::Index k = 0; k < m.biases[l].size(); ++k) {
      MlpModel p = m, q = m;
      p.biases[l][k] += h;
      q.biases[l][k] -= h;
      const double fd = (mse_loss(p, x, y) - mse_loss(q, x, y)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad.biases[l][k]) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("nesterov step by hand") {
  // f(theta) = theta^2 / 2, gradient theta
  Eigen::VectorXd theta(1), v(1);
  theta << 1.0;
  v << 0.5;
  nesterov_step(theta, v, 0.9, 0.1, [](const Eigen::VectorXd& t) { return t; });
  // lookahead 1.45, v = 0.45 - 0.145 = 0.305, theta = 1.305
  CHECK(v[0] == doctest::Approx(0.305).epsilon(1e-15));
  CHECK(theta[0] == doctest::Approx(1.305).epsilon(1e-15));
}

TEST_CASE("training with momentum zero equals plain gradient descent") {
  const MlpModel m = init_mlp({2, 3, 1}, 3);
  const Eigen::MatrixXd x = gaussian(2, 4, 5);
  const Eigen::MatrixXd y = gaussian(1, 4, 6);
  TrainConfig c;
  c.learning_rates = {0.05};
  c.momentum = 0.0;
  c.batch_size = 4;
  c.epochs = 3;
  const TrainResult r = train_mlp(m, x, y, c);
  MlpModel ref = m, g;
  for (int e = 0; e < 3; ++e) {
    loss_and_gradient(ref, x, y, g);
    for (std::size_t l = 0; l < ref.layer_count(); ++l) {
      ref.weights[l] -= 0.05 * g.weights[l];
      ref.biases[l] -= 0.05 * g.biases[l];
    }
  }
  for (std::size_t l = 0; l < ref.layer_count(); ++l)
    CHECK((r.model.weights[l] - ref.weights[l]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("training is deterministic and logs from epoch zero") {
  const MlpModel m = init_mlp({3, 8, 2}, 4);
  const Eigen::MatrixXd x = gaussian(3, 40, 7);
  const Eigen::MatrixXd y = predict_batch(init_mlp({3, 6, 2}, 9), x);
  TrainConfig c;
  c.epochs = 20;
  c.batch_size = 8;
  c.seed = 5;
  const TrainResult a = train_mlp(m, x, y, c);
  const TrainResult b = train_mlp(m, x, y, c);
  CHECK(a.model.weights[0] == b.model.weights[0]);
  REQUIRE(a.history.size() == 21);
  CHECK(a.history[0].epoch == 0);
  CHECK(a.history[0].train_mse == doctest::Approx(mse_loss(m, x, y)));
  for (const auto& rec : a.history) CHECK(std::isfinite(rec.train_mse));
  CHECK(a.history.back().train_mse < a.history[0].train_mse);
}

TEST_CASE("self-generated targets have zero initial loss") {
  const MlpModel m = init_mlp({4, 6, 3}, 2);
  const Eigen::MatrixXd x = gaussian(4, 16, 3);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 16;
  const TrainResult r = train_mlp(m, x, predict_batch(m, x), c);
  CHECK(r.history[0].train_mse == 0.0);
}

TEST_CASE("blow-up falls back to a smaller rate") {
  const MlpModel m = init_mlp({2, 16, 1}, 1);
  const Eigen::MatrixXd x = 10.0 * gaussian(2, 32, 2);
  const Eigen::MatrixXd y = gaussian(1, 32, 3);
  TrainConfig c;
  c.learning_rates = {1e-6, 50.0};
  c.epochs = 5;
  c.batch_size = 8;
  const TrainResult r = train_mlp(m, x, y, c);
  REQUIRE(r.attempts.size() == 2);
  CHECK(r.attempts[0].learning_rate == 50.0);
  CHECK(r.attempts[0].blew_up);
  CHECK(r.learning_rate == 1e-6);

  c.learning_rates = {50.0, 100.0};
  try {
    train_mlp(m, x, y, c);
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("lr=100") != std::string::npos);
    CHECK(std::string(e.what()).find("lr=50") != std::string::npos);
  }
}

TEST_CASE("training configuration is validated") {
  const MlpModel m = init_mlp({2, 3, 1}, 1);
  const Eigen::MatrixXd x = gaussian(2, 4, 1), y = gaussian(1, 4, 2);
  TrainConfig c;
  c.batch_size = 5;
  CHECK_THROWS_AS(train_mlp(m, x, y, c), ConfigError);
  c.batch_size = 2;
  c.momentum = 1.0;
  CHECK_THROWS_AS(train_mlp(m, x, y, c), ConfigError);
  c.momentum = 0.9;
  c.learning_rates = {};
  CHECK_THROWS_AS(train_mlp(m, x, y, c), ConfigError);
  c.learning_rates = {1e-3};
  CHECK_THROWS_AS(train_mlp(m, x, gaussian(2, 4, 2), c), ShapeError);
}

TEST_CASE("linear fit") {
  Eigen::MatrixXd x(1, 2), y(1, 2);
  x << 0, 1;
  y << 1, 3;
  const LinearModel l = fit_linear(x, y);
  CHECK(l.matrix(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(l.bias[0] == doctest::Approx(1.0).epsilon(1e-9));

  const Eigen::MatrixXd a = gaussian(3, 4, 1);
  const Eigen::VectorXd b = gaussian(3, 1, 2).col(0);
  const Eigen::MatrixXd xs = gaussian(4, 30, 3);
  const Eigen::MatrixXd ys = (a * xs).colwise() + b;
  const LinearModel exact = fit_linear(xs, ys);
  CHECK((exact.matrix - a).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((exact.bias - b).cwiseAbs().maxCoeff() < 1e-8);

  const Eigen::MatrixXd noisy = ys + gaussian(3, 30, 4);
  const LinearModel fit = fit_linear(xs, noisy);
  const Eigen::MatrixXd residual = noisy - predict_batch(fit, xs);
  CHECK((residual * xs.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(residual.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8);

  CHECK_THROWS_AS(fit_linear(xs, gaussian(3, 29, 1)), ShapeError);
  CHECK_THROWS_AS(fit_linear(Eigen::MatrixXd(4, 0), Eigen::MatrixXd(3, 0)), ConfigError);
}

TEST_CASE("regressor variant dispatch") {
  const Regressor r = LinearModel{Eigen::MatrixXd::Identity(2, 3), Eigen::Vector2d(1, 1)};
  CHECK(input_dim(r) == 3);
  CHECK(output_dim(r) == 2);
  CHECK(predict(r, Eigen::Vector3d(1, 2, 3)) == Eigen::Vector2d(2, 3));
  const Regressor n = init_mlp({3, 4, 2}, 1);
  CHECK(input_dim(n) == 3);
  CHECK(predict_batch(n, Eigen::MatrixXd::Zero(3, 5)).cols() == 5);
}
