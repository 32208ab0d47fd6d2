// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--cli PATH] [--cache DIR] [--only 1,5,9]
#include "pcanet/config.hpp"
#include "pcanet/dataset.hpp"
#include "pcanet/error.hpp"
#include "pcanet/experiments.hpp"
#include "pcanet/protocols.hpp"
#include "pcanet/theory.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace pcanet;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Context {
  fs::path cache;
  fs::path cli;
  std::map<std::string, ExperimentData> data;
  std::map<std::string, Surrogate> models;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

ExperimentConfig config_for(ProblemKind problem) {
  ExperimentConfig c = default_config(problem);
  if (problem == ProblemKind::darcy_piecewise || problem == ProblemKind::darcy_lognormal) {
    c.resolutions = {17, 33, 65};
  } else if (problem == ProblemKind::linear_elliptic || problem == ProblemKind::poisson) {
    c.resolutions = {33};
  } else if (problem == ProblemKind::burgers) {
    c.resolutions = {1024};
  }
  c.n_train = 256;
  c.n_test = 500;
  c.threads = 1;
  return c;
}

const ExperimentData& data_for(Context& ctx, ProblemKind problem) {
  const std::string key(to_string(problem));
  auto it = ctx.data.find(key);
  if (it == ctx.data.end()) {
    progress("loading or generating " + key + " data");
    it = ctx.data.emplace(key, load_or_generate(ctx.cache / key, config_for(problem))).first;
  }
  return it->second;
}

const Surrogate& model_for(Context& ctx, ProblemKind problem, int resolution, int d, RegressorKind kind) {
  const std::string key = std::string(to_string(problem)) + "/" + std::to_string(resolution) + "/" +
                          std::to_string(d) + "/" + std::string(to_string(kind));
  auto it = ctx.models.find(key);
  if (it == ctx.models.end()) {
    progress("fitting " + key);
    const ExperimentConfig c = config_for(problem);
    it = ctx.models.emplace(key, fit_cell(c, data_for(ctx, problem), resolution, d, c.n_train, kind).surrogate).first;
  }
  return it->second;
}

double test_error(Context& ctx, ProblemKind problem, int resolution, int d, RegressorKind kind) {
  const Surrogate& s = model_for(ctx, problem, resolution, d, kind);
  const Dataset test = subsample_dataset(data_for(ctx, problem).test, resolution);
  return evaluate(s, problem, 256, test).relative_error;
}

Outcome mesh_invariance(Context& ctx) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::string detail = "errors";
  for (int n : {17, 33, 65}) {
    const double e = test_error(ctx, ProblemKind::darcy_piecewise, n, 20, RegressorKind::mlp);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    detail += " n" + std::to_string(n) + "=" + fmt(e);
  }
  return {hi - lo < 0.02, detail + ", spread " + fmt(hi - lo) + " (< 0.02)"};
}

Outcome pca_tail_identity(Context&) {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int count = 20 + static_cast<int>(rng() % 60);
    const int d = 1 + static_cast<int>(rng() % 15);
    const int n = rep % 2 == 0 ? 17 : 33;
    std::vector<GridFunction> data;
    for (int i = 0; i < count; ++i) data.push_back(sample_gaussian_box(MeasureSpec::mu_G(n - 1), n, derive_seed(rep, i)));
    const PcaModel m = fit_pca(data, d);
    const double tail = eigenvalue_tail(m);
    worst = std::max(worst, std::abs(empirical_projection_error(m, data) - tail) / tail);
  }
  return {worst <= 1e-10, "max relative deviation " + fmt(worst) + " (<= 1e-10)"};
}

Outcome covariance_rate(Context&) {
  const TheoryReport r = check_mc_covariance_rate(MeasureSpec::mu_G(8), {64, 128, 256, 512, 1024}, 200, 3);
  return {r.passed, "slope " + fmt(r.statistic("slope")) + " (-1 +- 0.15), Q " + fmt(r.statistic("Q_estimate"))};
}

Outcome fan(Context&) {
  bool ok = true;
  std::string detail;
  for (int d : {1, 2, 3}) {
    const TheoryReport r = check_fan(6, d, 500, 20, 100 + d);
    ok = ok && r.passed && r.trials == 10000;
    detail += "d=" + std::to_string(d) + ": " + fmt(r.statistic("violations")) + " violations, gap " +
              fmt(r.statistic("max_equality_gap")) + "; ";
  }
  return {ok, detail};
}

Outcome solver_validation(Context&) {
  constexpr double pi = std::numbers::pi;
  // u = sin(pi x) sin(pi y), a = 2 + sin(pi x) cos(pi y), f = -div(a grad u)
  auto error = [&](int n) {
    const Grid g{DomainKind::box2d, n};
    const auto a = GridFunction::from_function(g, [&](double x, double y) { return 2 + std::sin(pi * x) * std::cos(pi * y); });
    const auto f = GridFunction::from_function(g, [&](double x, double y) {
      const double av = 2 + std::sin(pi * x) * std::cos(pi * y);
      const double ax = pi * std::cos(pi * x) * std::cos(pi * y), ay = -pi * std::sin(pi * x) * std::sin(pi * y);
      const double ux = pi * std::cos(pi * x) * std::sin(pi * y), uy = pi * std::sin(pi * x) * std::cos(pi * y);
      const double lap = -2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
      return -(ax * ux + ay * uy + av * lap);
    });
    const auto exact = GridFunction::from_function(g, [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    return (solve_darcy({a, f}, {1e-12, 40}).values() - exact.values()).cwiseAbs().maxCoeff();
  };
  const double e17 = error(17), e33 = error(33), e65 = error(65);
  const double o1 = std::log2(e17 / e33), o2 = std::log2(e33 / e65);
  const bool order_ok = o1 >= 1.8 && o1 <= 2.2 && o2 >= 1.8 && o2 <= 2.2;

  double worst = 0.0;
  const auto sine = GridFunction::from_function({DomainKind::torus1d, 1024}, [&](double s, double) { return std::sin(2 * pi * s); });
  const auto random = sample_mu_B(MeasureSpec::mu_B(100), 1024, 5);
  const GridFunction centred(random.grid(), random.values().array() - random.values().mean());
  for (const GridFunction& u0 : {sine, centred}) {
    const BurgersProblem p{u0, 0.05, 0.5};
    const GridFunction ref = oracle_burgers_colehopf(p);
    worst = std::max(worst, norm(solve_burgers(p) - ref) / norm(ref));
  }
  return {order_ok && worst < 1e-6, "orders " + fmt(o1) + ", " + fmt(o2) + " in [1.8, 2.2]; Cole-Hopf error " +
                                        fmt(worst) + " (< 1e-6)"};
}

Outcome linear_ordering(Context& ctx) {
  bool ok = true;
  std::string detail;
  for (ProblemKind p : {ProblemKind::linear_elliptic, ProblemKind::poisson}) {
    const double lin = test_error(ctx, p, 33, 60, RegressorKind::linear);
    const double nn = test_error(ctx, p, 33, 60, RegressorKind::mlp);
    ok = ok && lin < nn;
    detail += std::string(to_string(p)) + ": linear " + fmt(lin) + " < nn " + fmt(nn) + "; ";
  }
  return {ok, detail};
}

Outcome nonlinear_ordering(Context& ctx) {
  const double pw_lin = test_error(ctx, ProblemKind::darcy_piecewise, 33, 15, RegressorKind::linear);
  const double pw_nn = test_error(ctx, ProblemKind::darcy_piecewise, 33, 15, RegressorKind::mlp);
  const double bu_lin = test_error(ctx, ProblemKind::burgers, 1024, 15, RegressorKind::linear);
  const double bu_nn = test_error(ctx, ProblemKind::burgers, 1024, 15, RegressorKind::mlp);
  const bool ok = pw_nn < pw_lin && bu_nn < bu_lin && bu_lin > 1.5 * bu_nn;
  return {ok, "darcy_piecewise nn " + fmt(pw_nn) + " < linear " + fmt(pw_lin) + "; burgers nn " + fmt(bu_nn) +
                  " < linear " + fmt(bu_lin) + ", ratio " + fmt(bu_lin / bu_nn) + " (> 1.5)"};
}

Outcome mesh_transfer(Context& ctx) {
  bool ok = true;
  std::string detail;
  for (ProblemKind p : {ProblemKind::darcy_piecewise, ProblemKind::darcy_lognormal}) {
    const Surrogate& s = model_for(ctx, p, 33, 20, RegressorKind::mlp);
    const ExperimentData& data = data_for(ctx, p);
    const double native = evaluate(s, p, 256, subsample_dataset(data.test, 33)).relative_error;
    const double moved = evaluate(s, p, 256, subsample_dataset(data.test, 65), true).relative_error;
    ok = ok && moved - native <= 0.05;
    detail += std::string(to_string(p)) + ": native " + fmt(native) + ", at 65 " + fmt(moved) + ", increase " +
              fmt(moved - native) + " (<= 0.05); ";
  }
  return {ok, detail};
}

Outcome taylor_decay(Context&) {
  const ExperimentConfig c = default_config(ProblemKind::coeff_model);
  const MeasureSpec spec = c.measure();
  const std::vector<int> ks{8, 16, 32, 64, 128};
  const StechkinReport st = stechkin_tail(spec, c.coeff_modes, ks);

  // the tail bound is the worst-case sup-norm truncation error, attained at the corner
  const auto modes = ordered_coeff_modes(spec);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(c.coeff_modes);
  ones.head(ks.front()).setZero();
  const double corner = assemble_coeff_field(modes, ones, c.finest()).values().cwiseAbs().maxCoeff();
  const double attained = std::abs(corner - st.tail_bounds.front()) / st.tail_bounds.front();

  // measured Taylor error of the solution on fresh coefficient samples
  const int n = c.finest(), samples = 100;
  const TaylorPoisson taylor(spec, ks.back(), n, c.cg_options());
  std::vector<double> errors(ks.size(), 0.0);
  for (int i = 0; i < samples; ++i) {
    const CoeffSample s = sample_coeff_model(spec, c.coeff_modes, n, derive_seed(99, i));
    const GridFunction truth = solve_poisson(s.field, c.cg_options());
    for (std::size_t k = 0; k < ks.size(); ++k) {
      const GridFunction approx(taylor.grid(), taylor.etas().leftCols(ks[k]) * s.xi.head(ks[k]));
      errors[k] += norm(approx - truth) / norm(truth) / samples;
    }
  }
  const double measured = log_log_slope(std::vector<double>(ks.begin(), ks.end()), errors);

  ComparisonSpec cs;
  ExperimentConfig cc = c;
  cc.n_train = 64;
  cc.n_test = 200;
  const auto rows = run_chkifa_comparison(cc, cs);
  bool ordered = true;
  std::string budgets;
  for (const ComparisonRow& t : rows) {
    if (t.method != "taylor") continue;
    for (const ComparisonRow& l : rows) {
      if (l.method == "pca-linear" && l.budget == t.budget) {
        ordered = ordered && t.relative_error <= l.relative_error;
        budgets += " b" + std::to_string(t.budget) + ": " + fmt(t.relative_error) + " <= " + fmt(l.relative_error);
      }
    }
  }
  const bool slope_ok = std::abs(st.slope - st.predicted_slope) <= 0.3;
  const bool measured_ok = measured <= st.predicted_slope + 0.3;
  return {slope_ok && measured_ok && attained < 1e-10 && ordered,
          "sup-norm truncation slope " + fmt(st.slope) + " vs 1-1/p = " + fmt(st.predicted_slope) +
              " (+-0.3); solution error slope " + fmt(measured) + " (<= " + fmt(st.predicted_slope + 0.3) +
              "); taylor vs pca-linear" + budgets};
}

Outcome gradient_check(Context&) {
  double worst = 0.0;
  const std::vector<std::vector<int>> suite{{3, 5, 4, 2}, {2, 8, 1}, {4, 3, 3, 3, 2}, {1, 6, 6, 1}, {5, 2, 5}};
  for (std::size_t t = 0; t < suite.size(); ++t) {
    const MlpModel m = init_mlp(suite[t], 10 + t);
    std::mt19937_64 rng(t);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(m.input_dim(), 10), y(m.output_dim(), 10);
    for (auto& v : x.reshaped()) v = normal(rng);
    for (auto& v : y.reshaped()) v = normal(rng);
    MlpModel grad;
    loss_and_gradient(m, x, y, grad);
    const double h = 1e-6;
    auto probe = [&](auto&& entry, double analytic) {
      MlpModel p = m, q = m;
      entry(p) += h;
      entry(q) -= h;
      const double fd = (mse_loss(p, x, y) - mse_loss(q, x, y)) / (2 * h);
      worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
      for (Eigen::Index k = 0; k < m.weights[l].size(); ++k)
        probe([&](MlpModel& mm) -> double& { return mm.weights[l].data()[k]; }, grad.weights[l].data()[k]);
      for (Eigen::Index k = 0; k < m.biases[l].size(); ++k)
        probe([&](MlpModel& mm) -> double& { return mm.biases[l][k]; }, grad.biases[l][k]);
    }
  }
  return {worst < 1e-5, "max relative error " + fmt(worst) + " (< 1e-5) over " + std::to_string(suite.size()) + " networks"};
}

Outcome lipschitz_chebyshev(Context&) {
  std::vector<GridFunction> data;
  for (int i = 0; i < 100; ++i) data.push_back(sample_gaussian_box(MeasureSpec::mu_G(16), 33, derive_seed(4, i)));
  const TheoryReport lip = check_encoder_lipschitz(fit_pca(data, 20), 1000, 8);
  bool ok = lip.passed;
  std::string detail = "encoder ratio " + fmt(lip.statistic("max_encoder_ratio")) + ", isometry defect " +
                       fmt(lip.statistic("max_decoder_isometry_defect"));
  for (double delta : {0.1, 0.5}) {
    const TheoryReport r = check_chebyshev_coverage(MeasureSpec::mu_G(16), 33, 10, delta, 200, 1000, 21);
    ok = ok && r.passed;
    detail += "; delta " + fmt(delta) + " coverage " + fmt(r.statistic("coverage")) + " (>= " +
              fmt(r.tolerances.front().second) + ")";
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double eval_error(const fs::path& csv) {
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::vector<std::string> cells;
  std::stringstream ss(row);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  if (cells.size() < 6) throw UsageError("malformed eval CSV " + csv.string());
  return std::stod(cells[5]);
}

Outcome determinism(Context& ctx) {
  if (ctx.cli.empty()) return {false, "no --cli path given"};
  const std::string sets =
      " --problem darcy_piecewise --set resolutions=17,33 --set n_train=128 --set n_test=64 --set dims=20"
      " --set epochs=30 --threads 1";
  double errors[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = ctx.cache / ("determinism_" + std::to_string(run));
    fs::remove_all(out);
    const std::string cli = "\"" + ctx.cli.string() + "\"";
    const std::string cfg = " --config \"" + (out / "data" / "config").string() + "\" --out \"" + out.string() + "\"";
    const std::string cmds[] = {
        cli + " generate" + sets + " --out \"" + out.string() + "\"",
        cli + " fit" + cfg + " --threads 1",
        cli + " eval" + cfg + " --threads 1 --csv \"" + (out / "eval.csv").string() + "\"",
    };
    for (const std::string& cmd : cmds) {
      if (std::system((cmd + " > /dev/null").c_str()) != 0) return {false, "command failed: " + cmd};
    }
    errors[run] = eval_error(out / "eval.csv");
  }
  const fs::path a = ctx.cache / "determinism_0", b = ctx.cache / "determinism_1";
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a / "data")) {
    if (!entry.is_regular_file() || entry.path().filename() == "config") continue;
    ++files;
    if (slurp(entry.path()) != slurp(b / fs::relative(entry.path(), a))) ++differing;
  }
  for (const auto& entry : fs::directory_iterator(a / "model")) {
    if (entry.path().extension() != ".f64") continue;
    ++files;
    if (slurp(entry.path()) != slurp(b / fs::relative(entry.path(), a))) ++differing;
  }
  const double diff = std::abs(errors[0] - errors[1]);
  return {differing == 0 && files > 0 && diff <= 1e-12,
          std::to_string(files) + " dataset/model files compared, " + std::to_string(differing) +
              " differ; errors " + fmt(errors[0]) + " vs " + fmt(errors[1]) + " (diff " + fmt(diff) + ")"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)(Context&);
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::string cli, cache = "acceptance_cache";
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the pcanet executable");
  app.add_option("--cache", cache, "data cache directory")->capture_default_str();
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.cache = fs::absolute(cache);
  ctx.cli = cli.empty() ? fs::path() : fs::absolute(cli);
  fs::create_directories(ctx.cache);

  const Criterion criteria[] = {
      {1, "mesh invariance", mesh_invariance},
      {2, "pca tail identity", pca_tail_identity},
      {3, "monte carlo covariance rate", covariance_rate},
      {4, "fan maximum principle", fan},
      {5, "solver validation", solver_validation},
      {6, "linear problems: linear beats nn", linear_ordering},
      {7, "nonlinear problems: nn beats linear", nonlinear_ordering},
      {8, "mesh transfer", mesh_transfer},
      {9, "taylor truncation decay", taylor_decay},
      {10, "gradient correctness", gradient_check},
      {11, "lipschitz and chebyshev", lipschitz_chebyshev},
      {12, "determinism", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << " [" << std::fixed << std::setprecision(1) << seconds << " s]" << std::defaultfloat << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
