#pragma once

#include "pcanet/config.hpp"
#include "pcanet/dataset.hpp"
#include "pcanet/surrogate.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pcanet {

/// Training and test pairs at the finest resolution of a config.
struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Generates both splits (n_train and n_test pairs).
ExperimentData generate_experiment_data(const ExperimentConfig& config);

/// Writes <dir>/<split>/n<res>/ for every configured resolution.
void write_experiment_data(const std::filesystem::path& dir, const ExperimentConfig& config,
                           const ExperimentData& data);

std::filesystem::path dataset_dir(const std::filesystem::path& root, Split split, int resolution);

/// Reads <dir>/<split>/n<res> when present with matching provenance,
/// otherwise generates and writes both splits.
ExperimentData load_or_generate(const std::filesystem::path& dir, const ExperimentConfig& config);

/// One evaluation result. CSV: problem,resolution,d,N,regressor,relative_error,online_seconds
struct EvalRow {
  std::string problem;
  int resolution = 0;
  int d = 0;
  int n_train = 0;
  std::string regressor;
  double relative_error = 0.0;
  double online_seconds = 0.0;
};

std::string eval_csv_header();
std::string to_csv(const EvalRow& row);

std::string regressor_name(const Regressor& r);

/// Wall-clock seconds per prediction, averaged over the inputs after one
/// discarded warm-up call.
double online_seconds_per_prediction(const Surrogate& surrogate, const FunctionBatch& inputs);

/// Evaluates on `test`. Without `transfer`, a grid mismatch is a ShapeError;
/// with it, both bases are moved to the test grid first.
EvalRow evaluate(const Surrogate& surrogate, ProblemKind problem, int n_train, const Dataset& test,
                 bool transfer = false);

/// Fits a surrogate at one resolution, d and sample count.
SurrogateFit fit_cell(const ExperimentConfig& config, const ExperimentData& data, int resolution, int d, int n_train,
                      RegressorKind kind, bool validate_during_training = false);

enum class SweepAxis { resolution, dimension, samples };
std::string_view to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view name);

/// A sweep cell either holds a result or the message of its failure.
struct SweepCell {
  SweepAxis axis = SweepAxis::resolution;
  int value = 0;
  EvalRow row;
  bool ok = false;
  std::string message;
};

/// Fixed values of the axes that are not swept.
struct SweepSpec {
  SweepAxis axis = SweepAxis::resolution;
  std::vector<int> values;
  std::vector<RegressorKind> regressors{RegressorKind::mlp, RegressorKind::linear};
  int resolution = 0;  ///< 0 = finest
  int d = 20;
  int n_train = 0;  ///< 0 = config.n_train
};

/// Cross product of axis values and regressors; failed cells are recorded
/// and the sweep continues. Rows are sorted by (regressor, axis value).
std::vector<SweepCell> run_sweep(const ExperimentConfig& config, const ExperimentData& data, const SweepSpec& spec);

/// CSV: axis,value,problem,resolution,d,N,regressor,relative_error,online_seconds,status,message
std::string sweep_csv_header();
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Dependency-free SVG line chart, one polyline per series.
std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x = false, bool log_y = false);
std::vector<PlotSeries> sweep_series(const std::vector<SweepCell>& cells);

/// Train at one resolution, evaluate natively and after basis transfer.
/// CSV: problem,d,train_resolution,eval_resolution,regressor,native_error,transferred_error,increase,gram_residual_in,gram_residual_out
struct TransferRow {
  std::string problem;
  int d = 0;
  int train_resolution = 0;
  int eval_resolution = 0;
  std::string regressor;
  double native_error = 0.0;
  double transferred_error = 0.0;
  double increase = 0.0;
  double gram_residual_in = 0.0;
  double gram_residual_out = 0.0;
};

std::string transfer_csv_header();
std::string to_csv(const TransferRow& row);

/// The native error is measured at train_resolution on the test set; the
/// transferred error at eval_resolution on the same test functions.
TransferRow run_transfer(const ExperimentConfig& config, const ExperimentData& data, int d, int train_resolution,
                         int eval_resolution, RegressorKind kind);

/// (a, f) pair of the elliptic forward problem for input x. The fixed
/// coefficient is used only by the linear elliptic problem.
EllipticProblem elliptic_problem(ProblemKind problem, const GridFunction& x, const GridFunction& fixed_coefficient);

/// Reduced basis Galerkin error on the test set with a PCA basis of d
/// training outputs. regressor column reads "rb".
EvalRow run_rb_baseline(const ExperimentConfig& config, const ExperimentData& data, int resolution, int d);

}  // namespace pcanet
