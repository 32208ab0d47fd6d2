#include "pcanet/protocols.hpp"

#include "pcanet/error.hpp"
#include "pcanet/log.hpp"
#include "pcanet/random_fields.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace pcanet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

void validate(const ComparisonSpec& spec) {
  if (spec.budgets.empty()) throw ConfigError("comparison needs at least one budget");
  for (int b : spec.budgets) {
    if (b <= 0) throw ConfigError("budgets must be positive");
  }
}

std::string comparison_csv_header() { return "method,d,budget,relative_error,test_hash"; }

std::string to_csv(const ComparisonRow& r) {
  return r.method + "," + std::to_string(r.d) + "," + std::to_string(r.budget) + "," + fmt(r.relative_error) + "," +
         r.test_hash;
}

std::vector<ComparisonRow> run_chkifa_comparison(const ExperimentConfig& config, const ComparisonSpec& spec) {
  validate(spec);
  if (config.problem != ProblemKind::coeff_model) throw ConfigError("the Taylor comparison needs the coeff_model problem");
  const int largest = *std::max_element(spec.budgets.begin(), spec.budgets.end());
  ExperimentConfig c = config;
  c.n_train = std::max(largest, 1);
  if (spec.timing_mode) c.threads = 1;
  const Dataset train = generate_dataset(c, Split::train, largest);
  const Dataset test = generate_dataset(c, Split::test, c.n_test);
  if (!test.xi) throw UsageError("the coefficient-model test set carries no coefficients");
  const std::string hash = content_hash(test.x.columns);
  const MeasureSpec model = c.measure();

  std::vector<ComparisonRow> rows;
  std::vector<int> budgets = spec.budgets;
  std::sort(budgets.begin(), budgets.end());
  for (int b : budgets) {
    if (b > test.xi->rows()) throw ConfigError("budget exceeds the number of model modes");
    const TaylorPoisson taylor(model, b, test.resolution(), c.cg_options());
    const FunctionBatch pred = taylor.predict_batch(*test.xi);
    rows.push_back({"taylor", b, b, relative_error(pred, test.y, c.inner_product).mean, hash});

    const int d = spec.couple_d_to_budget ? b : std::min(b, c.dims.front());
    const Dataset sub = head(train, b);
    SurrogateFitOptions options = c.fit_options(d, RegressorKind::linear);
    const SurrogateFit fit = fit_surrogate(sub.x, sub.y, options);
    rows.push_back({"pca-linear", d, b, relative_test_error(fit.surrogate, test.x, test.y).mean, hash});
  }
  return rows;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("slope needs at least two matching points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

StechkinReport stechkin_tail(const MeasureSpec& model_spec, int modes, const std::vector<int>& truncations) {
  const std::vector<CoeffMode> ordered = ordered_coeff_modes(model_spec);
  if (modes <= 0 || modes > static_cast<int>(ordered.size())) modes = static_cast<int>(ordered.size());
  std::vector<double> sup(static_cast<std::size_t>(modes));
  for (int j = 0; j < modes; ++j) sup[static_cast<std::size_t>(j)] = coeff_mode_sup_norm(ordered[static_cast<std::size_t>(j)]);
  // suffix sums of sup norms
  std::vector<double> tail(sup.size() + 1, 0.0);
  for (int j = modes - 1; j >= 0; --j) tail[static_cast<std::size_t>(j)] = tail[static_cast<std::size_t>(j) + 1] + sup[static_cast<std::size_t>(j)];

  StechkinReport r;
  r.p = 2.0 / model_spec.exponent;
  r.predicted_slope = 1.0 - 1.0 / r.p;
  std::vector<double> ks;
  for (int k : truncations) {
    if (k <= 0 || k >= modes) throw ConfigError("truncation " + std::to_string(k) + " outside the model modes");
    r.truncations.push_back(k);
    r.tail_bounds.push_back(tail[static_cast<std::size_t>(k)]);
    ks.push_back(k);
  }
  r.slope = log_log_slope(ks, r.tail_bounds);
  return r;
}

std::string timing_csv_header() { return "method,d,online_s,offline_s"; }

std::string to_csv(const TimingRow& r) {
  return r.method + "," + std::to_string(r.d) + "," + fmt(r.online_s) + "," + fmt(r.offline_s);
}

TimingResult run_rb_timing(const ExperimentConfig& config, const ExperimentData& data, const std::vector<int>& dims) {
  if (dims.size() < 2) throw ConfigError("timing needs at least two dimensions");
  if (config.problem != ProblemKind::darcy_piecewise && config.problem != ProblemKind::darcy_lognormal) {
    throw ConfigError("RB timing runs on a Darcy problem");
  }
  ExperimentConfig c = config;
  c.threads = 1;
  const int n = c.finest();
  const Dataset train = subsample_dataset(data.train, n);
  const Dataset test = subsample_dataset(data.test, n);
  const GridFunction unit = GridFunction::constant(test.x.grid, 1.0);

  TimingResult result;
  std::vector<int> sorted = dims;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> rb_online, mlp_online, linear_online;
  for (int d : sorted) {
    auto t0 = Clock::now();
    const ReducedBasis rb(fit_pca(train.y.grid, train.y.columns, d, c.inner_product));
    const double rb_offline = seconds_since(t0);
    double sink = rb.solve(test.x.at(0), unit).values()[0];
    t0 = Clock::now();
    for (int i = 0; i < test.count(); ++i) sink += rb.solve(test.x.at(i), unit).values()[0];
    const double rb_on = seconds_since(t0) / test.count();
    if (!std::isfinite(sink)) warn("non-finite reduced basis solution while timing");
    result.rows.push_back({"rb", d, rb_on, rb_offline});
    rb_online.push_back(rb_on);

    for (RegressorKind kind : {RegressorKind::mlp, RegressorKind::linear}) {
      t0 = Clock::now();
      const SurrogateFit fit = fit_surrogate(train.x, train.y, c.fit_options(d, kind));
      const double offline = seconds_since(t0);
      const double online = online_seconds_per_prediction(fit.surrogate, test.x);
      result.rows.push_back({std::string(to_string(kind)), d, online, offline});
      (kind == RegressorKind::mlp ? mlp_online : linear_online).push_back(online);
    }
  }
  result.d_ratio = static_cast<double>(sorted.back()) / sorted.front();
  result.rb_growth = rb_online.back() / rb_online.front();
  result.mlp_growth = mlp_online.back() / mlp_online.front();
  result.rb_superlinear = result.rb_growth > result.d_ratio;
  result.linear_fastest = true;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    result.linear_fastest = result.linear_fastest && linear_online[i] < rb_online[i] && linear_online[i] < mlp_online[i];
  }
  return result;
}

}  // namespace pcanet
