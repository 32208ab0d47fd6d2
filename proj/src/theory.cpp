#include "pcanet/theory.hpp"

#include "pcanet/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace pcanet {

double TheoryReport::statistic(const std::string& key) const {
  for (const auto& [k, v] : statistics) {
    if (k == key) return v;
  }
  throw ConfigError("report '" + name + "' has no statistic '" + key + "'");
}

std::string TheoryReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& [k, v] : statistics) out << name << ",statistic," << k << ',' << v << '\n';
  for (const auto& [k, v] : tolerances) out << name << ",tolerance," << k << ',' << v << '\n';
  out << name << ",result,passed," << (passed ? 1 : 0) << '\n';
  return out.str();
}

std::string TheoryReport::summary() const {
  std::ostringstream out;
  out << name << ": " << (passed ? "PASS" : "FAIL") << " (" << trials << " trials)\n";
  for (const auto& [k, v] : statistics) out << "  " << k << " = " << v << '\n';
  for (const auto& [k, v] : tolerances) out << "  tolerance " << k << " = " << v << '\n';
  return out.str();
}

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Eigen::MatrixXd random_frame(int dim, int d, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(dim, d, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, d);
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

double fan_trace(const Eigen::MatrixXd& c, const Eigen::MatrixXd& frame) {
  return (frame.transpose() * c * frame).trace();
}

TheoryReport check_fan(int dim, int d, int frames, int matrices, std::uint64_t seed) {
  if (d < 1 || d > dim) throw ConfigError("Fan check needs 1 <= d <= dim");
  std::mt19937_64 rng(seed);
  constexpr double kTol = 1e-12;
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_equality_gap = 0.0;
  int violations = 0;
  for (int m = 0; m < matrices; ++m) {
    const Eigen::MatrixXd b = gaussian_matrix(dim, dim, rng);
    const Eigen::MatrixXd c = b * b.transpose() / dim;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    const double top = eig.eigenvalues().tail(d).sum();
    const double scale = std::max(1.0, top);
    for (int f = 0; f < frames; ++f) {
      const double excess = (fan_trace(c, random_frame(dim, d, rng)) - top) / scale;
      worst_excess = std::max(worst_excess, excess);
      if (excess > kTol) ++violations;
    }
    const double at_eigvecs = fan_trace(c, eig.eigenvectors().rightCols(d));
    worst_equality_gap = std::max(worst_equality_gap, std::abs(at_eigvecs - top) / scale);
  }
  TheoryReport r;
  r.name = "fan";
  r.trials = frames * matrices;
  r.statistics = {{"dim", dim},
                  {"d", d},
                  {"matrices", matrices},
                  {"violations", violations},
                  {"max_relative_excess", worst_excess},
                  {"max_equality_gap", worst_equality_gap}};
  r.tolerances = {{"violation_threshold", kTol}, {"equality_tolerance", kTol}};
  r.passed = violations == 0 && worst_equality_gap <= kTol;
  return r;
}

Eigen::VectorXd kl_variances(const MeasureSpec& spec) {
  if (spec.kind == MeasureKind::mu_B) {
    const int k = spec.cutoff;
    Eigen::VectorXd v(2 * k + 1);
    v[0] = std::pow(torus_mode_std(spec, 0), 2);
    for (int j = 1; j <= k; ++j) {
      // Real cosine and sine coefficients each carry sigma_k^2.
      v[2 * j - 1] = v[2 * j] = std::pow(torus_mode_std(spec, j), 2);
    }
    return v;
  }
  if (spec.kind != MeasureKind::mu_G) throw ConfigError("covariance rate check needs a Gaussian measure (mu_G or mu_B)");
  return box_mode_std(spec).cwiseAbs2();
}

TheoryReport check_mc_covariance_rate(const MeasureSpec& spec, const std::vector<int>& sample_counts, int trials,
                                      std::uint64_t seed, double slope_tolerance) {
  if (sample_counts.size() < 2) throw ConfigError("rate check needs at least two sample counts");
  const Eigen::VectorXd var = kl_variances(spec);
  const Eigen::VectorXd sigma = var.cwiseSqrt();
  const Eigen::Index dim = var.size();
  std::vector<double> ns, errs;
  TheoryReport r;
  r.name = "mc_covariance_rate";
  r.trials = trials;
  double q_sum = 0.0;
  for (std::size_t c = 0; c < sample_counts.size(); ++c) {
    const int n = sample_counts[c];
    if (n < 1) throw ConfigError("sample counts must be positive");
    double total = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng(derive_seed(seed, c * 1000003ULL + static_cast<std::uint64_t>(t)));
      const Eigen::MatrixXd x = sigma.asDiagonal() * gaussian_matrix(dim, n, rng);
      Eigen::MatrixXd cov = x * x.transpose() / n;
      cov.diagonal() -= var;
      total += cov.squaredNorm();
    }
    const double mean = total / trials;
    ns.push_back(n);
    errs.push_back(mean);
    q_sum += mean * n;
    r.statistics.emplace_back("hs_error_sq_N" + std::to_string(n), mean);
  }
  const bool degenerate = std::all_of(errs.begin(), errs.end(), [](double e) { return e == 0.0; });
  const double slope = degenerate ? 0.0 : loglog_slope(ns, errs);
  const double q_analytic = var.sum() * var.sum() + var.squaredNorm();
  r.statistics.emplace_back("slope", slope);
  r.statistics.emplace_back("Q_estimate", q_sum / static_cast<double>(ns.size()));
  r.statistics.emplace_back("Q_analytic", q_analytic);
  r.statistics.emplace_back("degenerate", degenerate ? 1.0 : 0.0);
  r.tolerances = {{"expected_slope", -1.0}, {"slope_tolerance", slope_tolerance}};
  r.passed = degenerate || std::abs(slope + 1.0) <= slope_tolerance;
  return r;
}

TheoryReport check_chebyshev_coverage(const MeasureSpec& spec, int n, int d, double delta, int n_train, int n_test,
                                      std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  std::vector<GridFunction> train;
  train.reserve(static_cast<std::size_t>(n_train));
  double second_moment = 0.0;
  for (int i = 0; i < n_train; ++i) {
    train.push_back(sample_field(spec, n, derive_seed(seed, static_cast<std::uint64_t>(i))));
    second_moment += std::pow(norm(train.back()), 2);
  }
  second_moment /= n_train;
  const PcaModel pca = fit_pca(train, d);
  const double bound = std::sqrt(second_moment / delta);
  int inside = 0;
  for (int i = 0; i < n_test; ++i) {
    const GridFunction x = sample_field(spec, n, derive_seed(seed, static_cast<std::uint64_t>(n_train + i)));
    if (encode(pca, x).cwiseAbs().maxCoeff() <= bound) ++inside;
  }
  const double coverage = static_cast<double>(inside) / n_test;
  const double se = std::sqrt(delta * (1.0 - delta) / n_test);
  TheoryReport r;
  r.name = "chebyshev_coverage";
  r.trials = n_test;
  r.statistics = {{"d", d}, {"delta", delta}, {"M", bound}, {"second_moment", second_moment}, {"coverage", coverage},
                  {"standard_error", se}};
  r.tolerances = {{"required_coverage", 1.0 - delta - 3.0 * se}};
  r.passed = coverage >= 1.0 - delta - 3.0 * se;
  return r;
}

TheoryReport check_encoder_lipschitz(const PcaModel& pca, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr double kTol = 1e-10;
  const Eigen::Index size = static_cast<Eigen::Index>(pca.grid.size());
  double worst_ratio = 0.0;
  double worst_isometry = 0.0;
  for (int t = 0; t < trials; ++t) {
    const GridFunction v(pca.grid, gaussian_matrix(size, 1, rng));
    const GridFunction z(pca.grid, gaussian_matrix(size, 1, rng));
    const double dist = norm(v - z, pca.inner_product);
    if (dist > 0.0) worst_ratio = std::max(worst_ratio, (encode(pca, v) - encode(pca, z)).norm() / dist);
    const Eigen::MatrixXd st = gaussian_matrix(pca.dimension(), 2, rng);
    const double latent_dist = (st.col(0) - st.col(1)).norm();
    const double fn_dist = norm(decode(pca, st.col(0)) - decode(pca, st.col(1)), pca.inner_product);
    worst_isometry = std::max(worst_isometry, std::abs(fn_dist - latent_dist) / latent_dist);
  }
  TheoryReport r;
  r.name = "encoder_lipschitz";
  r.trials = trials;
  r.statistics = {{"max_encoder_ratio", worst_ratio}, {"max_decoder_isometry_defect", worst_isometry}};
  r.tolerances = {{"ratio_bound", 1.0 + kTol}, {"isometry_tolerance", kTol}};
  r.passed = worst_ratio <= 1.0 + kTol && worst_isometry <= kTol;
  return r;
}

std::vector<std::string> theory_check_names() { return {"fan", "mc-rate", "chebyshev", "lipschitz"}; }

}  // namespace pcanet
