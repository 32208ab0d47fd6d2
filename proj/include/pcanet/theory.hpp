#pragma once

#include "pcanet/pca.hpp"
#include "pcanet/random_fields.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pcanet {

/// Outcome of an empirical check. `passed` is computed only from the listed
/// statistics and tolerances.
struct TheoryReport {
  std::string name;
  int trials = 0;
  std::vector<std::pair<std::string, double>> statistics;
  std::vector<std::pair<std::string, double>> tolerances;
  bool passed = false;

  double statistic(const std::string& key) const;
  /// One "name,key,value" row per statistic and tolerance, plus the verdict.
  std::string to_csv() const;
  std::string summary() const;
};

/// Ky Fan maximum principle: for random PSD matrices of size dim, the trace of
/// C over any orthonormal d-frame never exceeds the sum of the top d
/// eigenvalues, with equality on the leading eigenvectors.
TheoryReport check_fan(int dim, int d, int frames, int matrices, std::uint64_t seed);

/// max over orthonormal d-frames of trace(U^T C U) for an explicit matrix.
double fan_trace(const Eigen::MatrixXd& c, const Eigen::MatrixXd& frame);

/// Expected squared Hilbert-Schmidt error of the empirical non-centered
/// covariance, measured in the truncated KL coefficient space where the true
/// covariance is diag(sigma_k^2). Fits the log-log slope against N.
TheoryReport check_mc_covariance_rate(const MeasureSpec& spec, const std::vector<int>& sample_counts, int trials,
                                      std::uint64_t seed, double slope_tolerance = 0.15);

/// KL variances sigma_k^2 of a Gaussian measure (box or torus) in coefficient space.
Eigen::VectorXd kl_variances(const MeasureSpec& spec);

/// Fraction of fresh samples whose PCA code lies in [-M, M]^d with
/// M = sqrt(E||x||^2 / delta); must be >= 1 - delta - 3 standard errors.
TheoryReport check_chebyshev_coverage(const MeasureSpec& spec, int n, int d, double delta, int n_train, int n_test,
                                      std::uint64_t seed);

/// Encoder 1-Lipschitz and decoder isometry on random function pairs.
TheoryReport check_encoder_lipschitz(const PcaModel& pca, int trials, std::uint64_t seed);

/// Names of the checks exposed by the theory subcommand.
std::vector<std::string> theory_check_names();

}  // namespace pcanet
