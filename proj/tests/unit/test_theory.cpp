#include "pcanet/error.hpp"
#include "pcanet/random_fields.hpp"
#include "pcanet/theory.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pcanet;

TEST_CASE("fan trace on a diagonal matrix") {
  const Eigen::Matrix3d c = Eigen::Vector3d(3, 2, 1).asDiagonal();
  double best = 0.0;
  // orthonormal 2-frames in R^3 are complements of a unit normal
  const int steps = 200;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const double theta = std::numbers::pi * i / steps, phi = 2 * std::numbers::pi * j / steps;
      const Eigen::Vector3d normal(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      const Eigen::MatrixXd column = normal;
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(column);
      const Eigen::MatrixXd full = qr.householderQ();
      best = std::max(best, fan_trace(c, full.rightCols(2)));
    }
  }
  CHECK(best <= 5.0 + 1e-12);
  CHECK(best == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(fan_trace(c, Eigen::MatrixXd(Eigen::Matrix3d::Identity().leftCols(2))) == 5.0);
}

TEST_CASE("fan trace on the identity is d") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(5, 3);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd frame = Eigen::MatrixXd(qr.householderQ()).leftCols(3);
  CHECK(fan_trace(c, frame) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("fan check on random matrices") {
  const TheoryReport r = check_fan(6, 2, 10000, 1, 4);
  CHECK(r.passed);
  CHECK(r.statistic("violations") == 0.0);
  CHECK(r.statistic("max_relative_excess") <= 1e-12);
  CHECK(r.trials == 10000);
  CHECK_THROWS_AS(check_fan(3, 4, 1, 1, 1), ConfigError);
  CHECK(r.to_csv().find("fan,result,passed,1") != std::string::npos);
  CHECK(r.to_csv().find("fan,statistic,violations,0\n") != std::string::npos);
}

TEST_CASE("covariance rate follows one over N") {
  const TheoryReport r = check_mc_covariance_rate(MeasureSpec::mu_G(8), {64, 128, 256, 512, 1024}, 200, 9);
  CHECK(r.passed);
  CHECK(std::abs(r.statistic("slope") + 1.0) <= 0.15);
  // E||C_N - C||^2 = Q / N with Q = (sum var)^2 + sum var^2 for Gaussian codes
  CHECK(r.statistic("Q_estimate") == doctest::Approx(r.statistic("Q_analytic")).epsilon(0.1));
  const double e64 = r.statistic("hs_error_sq_N64"), e128 = r.statistic("hs_error_sq_N128");
  CHECK(e128 / e64 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("zero-variance measure has zero covariance error") {
  MeasureSpec spec = MeasureSpec::mu_G(4);
  spec.scale = 0.0;
  const TheoryReport r = check_mc_covariance_rate(spec, {8, 16}, 5, 1);
  CHECK(r.statistic("hs_error_sq_N8") == 0.0);
  CHECK(r.statistic("hs_error_sq_N16") == 0.0);
  CHECK(r.passed);
}

TEST_CASE("torus variances") {
  const Eigen::VectorXd v = kl_variances(MeasureSpec::mu_B(4));
  CHECK(v.size() == 9);
  CHECK(v[1] == v[2]);
  CHECK_THROWS_AS(kl_variances(MeasureSpec::mu_P(4)), ConfigError);
}

TEST_CASE("chebyshev coverage") {
  const TheoryReport r = check_chebyshev_coverage(MeasureSpec::mu_G(8), 17, 10, 0.5, 200, 500, 3);
  CHECK(r.passed);
  CHECK(r.statistic("coverage") >= 0.5);
  CHECK_THROWS_AS(check_chebyshev_coverage(MeasureSpec::mu_G(8), 17, 2, 1.0, 10, 10, 1), ConfigError);
  CHECK(check_chebyshev_coverage(MeasureSpec::mu_G(8), 17, 2, 0.999, 50, 200, 2).passed);
}

TEST_CASE("one-dimensional coverage matches the normal tail") {
  // the leading PCA code is approximately N(0, 1/81), the constant KL mode
  const int n_test = 4000;
  const TheoryReport r = check_chebyshev_coverage(MeasureSpec::mu_G(8), 17, 1, 0.99, 1000, n_test, 5);
  const double sigma = 1.0 / 9.0;
  const double expected = std::erf(r.statistic("M") / (sigma * std::sqrt(2.0)));
  const double se = std::sqrt(expected * (1 - expected) / n_test);
  CHECK(expected < 0.95);
  CHECK(std::abs(r.statistic("coverage") - expected) <= 3 * se);
}

TEST_CASE("encoder lipschitz and decoder isometry") {
  std::vector<GridFunction> data;
  for (int i = 0; i < 30; ++i) data.push_back(sample_gaussian_box(MeasureSpec::mu_G(8), 17, derive_seed(7, i)));
  const PcaModel pca = fit_pca(data, 6);
  const TheoryReport r = check_encoder_lipschitz(pca, 100, 1);
  CHECK(r.passed);
  CHECK(r.statistic("max_encoder_ratio") <= 1.0 + 1e-10);

  const GridFunction v = data[0];
  CHECK(encode(pca, v - v).norm() == 0.0);
  Eigen::VectorXd c(6);
  c << 1, -2, 0.5, 0, 3, 1;
  const GridFunction in_span = decode(pca, c);
  CHECK((encode(pca, v + in_span) - encode(pca, v)).norm() / norm(in_span) == doctest::Approx(1.0).epsilon(1e-10));
  const GridFunction orth = data[1] - project(pca, data[1]);
  CHECK((encode(pca, v + orth) - encode(pca, v)).norm() < 1e-10 * norm(orth));
}

TEST_CASE("check names") {
  CHECK(theory_check_names() == std::vector<std::string>{"fan", "mc-rate", "chebyshev", "lipschitz"});
}
