#pragma once

#include "pcanet/config.hpp"
#include "pcanet/experiments.hpp"

#include <string>
#include <vector>

namespace pcanet {

/// How the compared methods share a budget.
struct ComparisonSpec {
  /// Budgets in PDE solves (Taylor) and training pairs (PCA-linear).
  std::vector<int> budgets{8, 16, 32, 64};
  /// PCA dimension equals the budget (d = N).
  bool couple_d_to_budget = true;
  /// Timing runs force one worker thread.
  bool timing_mode = false;
};

void validate(const ComparisonSpec& spec);

/// One row of (method,d,budget,relative_error), plus the shared test hash.
struct ComparisonRow {
  std::string method;
  int d = 0;
  int budget = 0;
  double relative_error = 0.0;
  std::string test_hash;
};

std::string comparison_csv_header();
std::string to_csv(const ComparisonRow& row);

/// Taylor truncation with K = b solves against PCA + linear fit on N = d = b
/// pairs, both on one shared test set of the coefficient model.
std::vector<ComparisonRow> run_chkifa_comparison(const ExperimentConfig& config, const ComparisonSpec& spec);

/// Stechkin tail bound sum_{j>K} ||phi_j||_inf of the ordered model modes and
/// its log-log slope against the constructed rate 1 - 1/p.
struct StechkinReport {
  std::vector<int> truncations;
  std::vector<double> tail_bounds;
  double slope = 0.0;
  double p = 0.0;
  double predicted_slope = 0.0;  ///< 1 - 1/p
};

/// p is constructed from the mode decay: ||phi_j||_inf ~ j^{-e/2} with e the
/// model exponent, so every p > 2/e is summable and 1 - 1/p -> 1 - e/2.
StechkinReport stechkin_tail(const MeasureSpec& model_spec, int modes, const std::vector<int>& truncations);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// (method,d,online_s,offline_s) for rb, mlp and linear.
struct TimingRow {
  std::string method;
  int d = 0;
  double online_s = 0.0;
  double offline_s = 0.0;
};

std::string timing_csv_header();
std::string to_csv(const TimingRow& row);

struct TimingResult {
  std::vector<TimingRow> rows;
  /// RB online time at the largest d over the smallest.
  double rb_growth = 0.0;
  double d_ratio = 0.0;
  double mlp_growth = 0.0;
  bool rb_superlinear = false;
  bool linear_fastest = false;
};

/// Single-threaded wall-clock timing at the finest resolution. Offline time
/// covers PCA and regressor fitting (RB: PCA and gradient precomputation).
TimingResult run_rb_timing(const ExperimentConfig& config, const ExperimentData& data, const std::vector<int>& dims);

}  // namespace pcanet
