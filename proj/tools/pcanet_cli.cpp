#include "pcanet/config.hpp"
#include "pcanet/dataset.hpp"
#include "pcanet/error.hpp"
#include "pcanet/experiments.hpp"
#include "pcanet/model_io.hpp"
#include "pcanet/protocols.hpp"
#include "pcanet/theory.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace pcanet;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

const char* kSchemas = R"(CSV schemas:
  eval, baseline-rb     problem,resolution,d,N,regressor,relative_error,online_seconds
  sweep                 axis,value,problem,resolution,d,N,regressor,relative_error,online_seconds,status,message
  transfer              problem,d,train_resolution,eval_resolution,regressor,native_error,transferred_error,
                        increase,gram_residual_in,gram_residual_out
  baseline-taylor       method,d,budget,relative_error,test_hash
  timing                method,d,online_s,offline_s
  theory                check,key,value  (key "passed" holds 1 or 0)
  history.csv (fit)     epoch,train_mse,test_relative_error

Datasets: <out>/data/<train|test>/n<res>/{meta,x.f64,y.f64[,xi.f64]}, raw little-endian
doubles, one sample per row. Relative output paths are resolved against $PCANET_OUTPUT_ROOT.
)";

struct Common {
  std::string problem;
  std::string config_file;
  std::vector<std::string> sets;
  std::string out = "out";
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--problem", c.problem,
                  "linear_elliptic, poisson, darcy_lognormal, darcy_piecewise, burgers or coeff_model");
  cmd->add_option("--config", c.config_file, "key = value config file");
  cmd->add_option("--set", c.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads (1 = bit-reproducible)");
}

ExperimentConfig build_config(const Common& c) {
  KeyValues kv;
  if (!c.config_file.empty()) kv = read_key_values(c.config_file);
  if (!c.problem.empty()) kv["problem"] = c.problem;
  for (const std::string& s : c.sets) {
    const KeyValues one = parse_key_values(s);
    if (one.size() != 1) throw UsageError("--set expects key=value, got '" + s + "'");
    kv[one.begin()->first] = one.begin()->second;
  }
  ExperimentConfig config = config_from_key_values(kv);
  if (c.threads > 0) config.threads = c.threads;
  config.output_dir = resolve_output(c.out);
  validate(config);
  return config;
}

fs::path data_root(const ExperimentConfig& config, const std::string& data) {
  return data.empty() ? config.output_dir / "data" : resolve_output(data);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

int cmd_generate(const Common& common) {
  const ExperimentConfig config = build_config(common);
  const fs::path root = config.output_dir / "data";
  const ExperimentData data = generate_experiment_data(config);
  write_experiment_data(root, config, data);
  write_key_values(root / "config", to_key_values(config));
  std::cout << "wrote " << data.train.count() << " train and " << data.test.count() << " test pairs at resolutions";
  for (int r : config.resolutions) std::cout << ' ' << r;
  std::cout << " to " << root.string() << '\n';
  return 0;
}

struct FitArgs {
  std::string data;
  std::string model;
  int resolution = 0;
  int d = 0;
  std::string regressor;
  bool validate = true;
};

int cmd_fit(const Common& common, const FitArgs& a) {
  ExperimentConfig config = build_config(common);
  if (!a.regressor.empty()) config.regressor = regressor_kind_from_string(a.regressor);
  const int resolution = a.resolution > 0 ? a.resolution : config.finest();
  const int d = a.d > 0 ? a.d : config.dims.front();
  const fs::path root = data_root(config, a.data);
  Dataset train = read_dataset(dataset_dir(root, Split::train, resolution));
  if (train.count() > config.n_train) train = head(train, config.n_train);
  const SurrogateFitOptions options = config.fit_options(d, config.regressor);

  SurrogateFit fit;
  const fs::path test_dir = dataset_dir(root, Split::test, resolution);
  if (a.validate && config.regressor == RegressorKind::mlp && fs::exists(test_dir / "meta")) {
    const Dataset test = read_dataset(test_dir);
    fit = fit_surrogate(train.x, train.y, options, &test.x, &test.y);
  } else {
    fit = fit_surrogate(train.x, train.y, options);
  }
  const fs::path model_dir = a.model.empty() ? config.output_dir / "model" : resolve_output(a.model);
  write_surrogate(model_dir, fit.surrogate);
  KeyValues fitted = to_key_values(config);
  fitted["resolution"] = std::to_string(resolution);
  fitted["d"] = std::to_string(d);
  fitted["n_train_used"] = std::to_string(train.count());
  std::ostringstream lr;
  lr << std::setprecision(17) << fit.learning_rate;
  fitted["learning_rate"] = lr.str();
  write_key_values(model_dir / "config", fitted);
  write_history(model_dir / "history.csv", fit.history);
  const RelativeError train_error = relative_test_error(fit.surrogate, train.x, train.y);
  std::cout << "fitted " << to_string(config.regressor) << " surrogate (d=" << d << ", N=" << train.count()
            << ", n=" << resolution << "), training relative error " << std::setprecision(6) << train_error.mean;
  if (config.regressor == RegressorKind::mlp) std::cout << ", learning rate " << fit.learning_rate;
  std::cout << "\nwrote " << model_dir.string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string data;
  std::string model;
  std::string csv;
  int resolution = 0;
  bool transfer = false;
  std::string split = "test";
};

int cmd_eval(const Common& common, const EvalArgs& a) {
  const ExperimentConfig config = build_config(common);
  const fs::path model_dir = a.model.empty() ? config.output_dir / "model" : resolve_output(a.model);
  const Surrogate surrogate = read_surrogate(model_dir);
  const KeyValues fitted = read_key_values(model_dir / "config");
  const ProblemKind problem = problem_kind_from_string(fitted.at("problem"));
  const int n_train = std::stoi(fitted.at("n_train_used"));
  const int resolution = a.resolution > 0 ? a.resolution : surrogate.pca_in.grid.n;
  const Split split = a.split == "train" ? Split::train : Split::test;
  if (a.split != "train" && a.split != "test") throw UsageError("--split must be train or test");
  const Dataset test = read_dataset(dataset_dir(data_root(config, a.data), split, resolution));
  const EvalRow row = evaluate(surrogate, problem, n_train, test, a.transfer);
  const std::string text = eval_csv_header() + "\n" + to_csv(row) + "\n";
  std::cout << text;
  if (!a.csv.empty()) write_text(resolve_output(a.csv), text);
  return 0;
}

struct SweepArgs {
  std::string axis = "resolution";
  std::vector<int> values;
  std::vector<std::string> regressors{"mlp", "linear"};
  int resolution = 0;
  int d = 0;
  int n = 0;
  std::string data;
};

int cmd_sweep(const Common& common, const SweepArgs& a) {
  ExperimentConfig config = build_config(common);
  SweepSpec spec;
  spec.axis = sweep_axis_from_string(a.axis);
  spec.values = a.values;
  if (spec.values.empty()) {
    switch (spec.axis) {
      case SweepAxis::resolution: spec.values = config.resolutions; break;
      case SweepAxis::dimension: spec.values = config.dims; break;
      case SweepAxis::samples: spec.values = {config.n_train / 4, config.n_train / 2, config.n_train}; break;
    }
  }
  spec.regressors.clear();
  for (const std::string& r : a.regressors) spec.regressors.push_back(regressor_kind_from_string(r));
  spec.resolution = a.resolution;
  spec.d = a.d > 0 ? a.d : config.dims.front();
  spec.n_train = a.n;
  if (spec.axis == SweepAxis::samples) {
    config.n_train = std::max(config.n_train, *std::max_element(spec.values.begin(), spec.values.end()));
  }
  const ExperimentData data = load_or_generate(data_root(config, a.data), config);
  const std::vector<SweepCell> cells = run_sweep(config, data, spec);

  const std::string stem = "sweep_" + std::string(to_string(spec.axis));
  std::ostringstream csv;
  write_sweep_csv(csv, cells);
  write_text(config.output_dir / (stem + ".csv"), csv.str());
  const std::string x_label = spec.axis == SweepAxis::resolution  ? "resolution n"
                              : spec.axis == SweepAxis::dimension ? "reduced dimension d"
                                                                  : "training samples N";
  write_text(config.output_dir / (stem + ".svg"),
             svg_line_plot(std::string(to_string(config.problem)) + " " + std::string(to_string(spec.axis)) + " sweep",
                           x_label, "relative test error", sweep_series(cells), spec.axis != SweepAxis::dimension,
                           true));
  std::cout << csv.str();
  const bool all_ok = std::all_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.ok; });
  return all_ok ? 0 : kExitFailed;
}

struct TransferArgs {
  int d = 0;
  int train_resolution = 33;
  int eval_resolution = 65;
  std::string regressor;
  std::string data;
};

int cmd_transfer(const Common& common, const TransferArgs& a) {
  ExperimentConfig config = build_config(common);
  const RegressorKind kind = a.regressor.empty() ? config.regressor : regressor_kind_from_string(a.regressor);
  const ExperimentData data = load_or_generate(data_root(config, a.data), config);
  const TransferRow row =
      run_transfer(config, data, a.d > 0 ? a.d : config.dims.front(), a.train_resolution, a.eval_resolution, kind);
  const std::string text = transfer_csv_header() + "\n" + to_csv(row) + "\n";
  write_text(config.output_dir / "transfer.csv", text);
  std::cout << text;
  return 0;
}

struct RbArgs {
  std::vector<int> dims;
  int resolution = 0;
  std::string data;
};

int cmd_baseline_rb(const Common& common, const RbArgs& a) {
  const ExperimentConfig config = build_config(common);
  const ExperimentData data = load_or_generate(data_root(config, a.data), config);
  const std::vector<int> dims = a.dims.empty() ? config.dims : a.dims;
  std::ostringstream csv;
  csv << eval_csv_header() << '\n';
  for (int d : dims) csv << to_csv(run_rb_baseline(config, data, a.resolution > 0 ? a.resolution : config.finest(), d)) << '\n';
  write_text(config.output_dir / "baseline_rb.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

struct TaylorArgs {
  std::vector<int> budgets{8, 16, 32, 64};
  std::vector<int> truncations{8, 16, 32, 64, 128};
};

int cmd_baseline_taylor(Common common, const TaylorArgs& a) {
  if (common.problem.empty()) common.problem = "coeff_model";
  const ExperimentConfig config = build_config(common);
  ComparisonSpec spec;
  spec.budgets = a.budgets;
  const std::vector<ComparisonRow> rows = run_chkifa_comparison(config, spec);
  std::ostringstream csv;
  csv << comparison_csv_header() << '\n';
  for (const ComparisonRow& r : rows) csv << to_csv(r) << '\n';
  write_text(config.output_dir / "baseline_taylor.csv", csv.str());
  std::cout << csv.str();
  const StechkinReport st = stechkin_tail(config.measure(), config.coeff_modes, a.truncations);
  std::cout << "stechkin tail slope " << st.slope << " (constructed 1 - 1/p = " << st.predicted_slope
            << ", p = " << st.p << ")\n";
  return 0;
}

struct TheoryArgs {
  std::string name;
  int dim = 6;
  int d = 2;
  int frames = 10000;
  int matrices = 20;
  int trials = 200;
  std::vector<int> sizes{64, 128, 256, 512, 1024};
  std::string measure = "mu_G";
  int cutoff = 8;
  int n = 33;
  double delta = 0.5;
  int n_train = 256;
  int n_test = 1000;
  std::uint64_t seed = 1;
};

int cmd_theory(const Common& common, const TheoryArgs& a) {
  const std::vector<std::string> names = theory_check_names();
  if (std::find(names.begin(), names.end(), a.name) == names.end()) {
    std::string list;
    for (const std::string& n : names) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown theory check '" + a.name + "'; available checks: " + list);
  }
  const fs::path out = resolve_output(common.out);
  const MeasureKind kind = measure_kind_from_string(a.measure);
  MeasureSpec spec = kind == MeasureKind::mu_B ? MeasureSpec::mu_B(a.cutoff) : MeasureSpec::mu_G(a.cutoff);
  TheoryReport report;
  if (a.name == "fan") {
    report = check_fan(a.dim, a.d, a.frames, a.matrices, a.seed);
  } else if (a.name == "mc-rate") {
    report = check_mc_covariance_rate(spec, a.sizes, a.trials, a.seed);
  } else if (a.name == "chebyshev") {
    report = check_chebyshev_coverage(spec, a.n, a.d, a.delta, a.n_train, a.n_test, a.seed);
  } else {
    Eigen::MatrixXd snapshots(static_cast<Eigen::Index>(Grid{spec.domain(), a.n}.size()), a.n_train);
    for (int i = 0; i < a.n_train; ++i) snapshots.col(i) = sample_field(spec, a.n, derive_seed(a.seed, i)).values();
    const PcaModel pca = fit_pca(Grid{spec.domain(), a.n}, snapshots, a.d);
    report = check_encoder_lipschitz(pca, a.trials, a.seed);
  }
  write_text(out / ("theory_" + a.name + ".csv"), report.to_csv());
  std::cout << report.summary() << '\n';
  return report.passed ? 0 : kExitFailed;
}

struct TimingArgs {
  std::vector<int> dims{15, 30, 45, 60};
  std::string data;
};

int cmd_timing(const Common& common, const TimingArgs& a) {
  ExperimentConfig config = build_config(common);
  config.threads = 1;
  const ExperimentData data = load_or_generate(data_root(config, a.data), config);
  const TimingResult result = run_rb_timing(config, data, a.dims);
  std::ostringstream csv;
  csv << timing_csv_header() << '\n';
  for (const TimingRow& r : result.rows) csv << to_csv(r) << '\n';
  write_text(config.output_dir / "timing.csv", csv.str());
  std::cout << csv.str() << "rb online growth " << result.rb_growth << " over d ratio " << result.d_ratio
            << (result.rb_superlinear ? " (superlinear)" : " (NOT superlinear)") << "; mlp growth " << result.mlp_growth
            << "; linear fastest: " << (result.linear_fastest ? "yes" : "no") << '\n';
  return result.rb_superlinear && result.linear_fastest ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator learning with PCA encoders and latent regressors", "pcanet"};
  app.footer(kSchemas);
  app.require_subcommand(1);

  Common common;
  auto* generate = app.add_subcommand("generate", "sample inputs, solve the forward problem, write datasets");
  add_common(generate, common);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit PCA encoders and a latent regressor on a dataset");
  add_common(fit, common);
  fit->add_option("--data", fit_args.data, "dataset root (default <out>/data)");
  fit->add_option("--model", fit_args.model, "model directory (default <out>/model)");
  fit->add_option("--resolution", fit_args.resolution, "grid resolution (default finest)");
  fit->add_option("--d", fit_args.d, "reduced dimension (default first of dims)");
  fit->add_option("--regressor", fit_args.regressor, "mlp or linear");
  fit->add_flag("!--no-validation", fit_args.validate, "skip the per-epoch test error");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "relative test error and online time of a fitted model");
  add_common(eval, common);
  eval->add_option("--data", eval_args.data, "dataset root (default <out>/data)");
  eval->add_option("--model", eval_args.model, "model directory (default <out>/model)");
  eval->add_option("--resolution", eval_args.resolution, "evaluation resolution (default the model's)");
  eval->add_option("--split", eval_args.split, "train or test")->capture_default_str();
  eval->add_option("--csv", eval_args.csv, "also write the row to this file");
  eval->add_flag("--transfer", eval_args.transfer, "move the PCA bases to the evaluation grid");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "error across resolution, dimension or sample count");
  add_common(sweep, common);
  sweep->add_option("--axis", sweep_args.axis, "resolution, dimension or samples")->capture_default_str();
  sweep->add_option("--values", sweep_args.values, "axis values")->delimiter(',');
  sweep->add_option("--regressors", sweep_args.regressors, "regressors to compare")->delimiter(',');
  sweep->add_option("--resolution", sweep_args.resolution, "fixed resolution (default finest)");
  sweep->add_option("--d", sweep_args.d, "fixed reduced dimension");
  sweep->add_option("--n", sweep_args.n, "fixed training sample count");
  sweep->add_option("--data", sweep_args.data, "dataset root (default <out>/data)");

  TransferArgs transfer_args;
  auto* transfer = app.add_subcommand("transfer", "train on one mesh, evaluate on another via basis transfer");
  add_common(transfer, common);
  transfer->add_option("--d", transfer_args.d, "reduced dimension");
  transfer->add_option("--train-resolution", transfer_args.train_resolution)->capture_default_str();
  transfer->add_option("--eval-resolution", transfer_args.eval_resolution)->capture_default_str();
  transfer->add_option("--regressor", transfer_args.regressor, "mlp or linear");
  transfer->add_option("--data", transfer_args.data, "dataset root (default <out>/data)");

  RbArgs rb_args;
  auto* rb = app.add_subcommand("baseline-rb", "reduced basis Galerkin error on a PCA basis of solutions");
  add_common(rb, common);
  rb->add_option("--dims", rb_args.dims, "reduced dimensions")->delimiter(',');
  rb->add_option("--resolution", rb_args.resolution, "grid resolution (default finest)");
  rb->add_option("--data", rb_args.data, "dataset root (default <out>/data)");

  TaylorArgs taylor_args;
  auto* taylor = app.add_subcommand("baseline-taylor", "Taylor truncation vs PCA-linear at equal PDE-solve budgets");
  add_common(taylor, common);
  taylor->add_option("--budgets", taylor_args.budgets, "solve budgets")->delimiter(',')->capture_default_str();
  taylor->add_option("--truncations", taylor_args.truncations, "K values for the tail slope")
      ->delimiter(',')
      ->capture_default_str();

  TheoryArgs theory_args;
  auto* theory = app.add_subcommand("theory", "empirical theory checks: fan, mc-rate, chebyshev, lipschitz");
  theory->add_option("name", theory_args.name, "check name")->required();
  theory->add_option("--out", common.out, "output directory")->capture_default_str();
  theory->add_option("--dim", theory_args.dim, "matrix size (fan)")->capture_default_str();
  theory->add_option("--d", theory_args.d, "frame or PCA dimension")->capture_default_str();
  theory->add_option("--frames", theory_args.frames, "random frames per matrix (fan)")->capture_default_str();
  theory->add_option("--matrices", theory_args.matrices, "random matrices (fan)")->capture_default_str();
  theory->add_option("--trials", theory_args.trials, "repetitions or pairs")->capture_default_str();
  theory->add_option("--sizes", theory_args.sizes, "sample counts (mc-rate)")->delimiter(',')->capture_default_str();
  theory->add_option("--measure", theory_args.measure, "mu_G or mu_B")->capture_default_str();
  theory->add_option("--cutoff", theory_args.cutoff, "KL cutoff")->capture_default_str();
  theory->add_option("--n", theory_args.n, "grid resolution")->capture_default_str();
  theory->add_option("--delta", theory_args.delta, "coverage level (chebyshev)")->capture_default_str();
  theory->add_option("--n-train", theory_args.n_train, "PCA samples")->capture_default_str();
  theory->add_option("--n-test", theory_args.n_test, "fresh samples (chebyshev)")->capture_default_str();
  theory->add_option("--seed", theory_args.seed)->capture_default_str();

  TimingArgs timing_args;
  auto* timing = app.add_subcommand("timing", "online/offline time of RB, PCA+NN and PCA+linear");
  add_common(timing, common);
  timing->add_option("--dims", timing_args.dims, "reduced dimensions")->delimiter(',')->capture_default_str();
  timing->add_option("--data", timing_args.data, "dataset root (default <out>/data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(common);
    if (fit->parsed()) return cmd_fit(common, fit_args);
    if (eval->parsed()) return cmd_eval(common, eval_args);
    if (sweep->parsed()) return cmd_sweep(common, sweep_args);
    if (transfer->parsed()) return cmd_transfer(common, transfer_args);
    if (rb->parsed()) return cmd_baseline_rb(common, rb_args);
    if (taylor->parsed()) return cmd_baseline_taylor(common, taylor_args);
    if (theory->parsed()) return cmd_theory(common, theory_args);
    if (timing->parsed()) return cmd_timing(common, timing_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}
