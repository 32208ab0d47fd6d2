#include "pcanet/experiments.hpp"

#include "pcanet/error.hpp"
#include "pcanet/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
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

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

bool provenance_matches(const KeyValues& expected, const KeyValues& found) {
  return std::all_of(expected.begin(), expected.end(), [&](const auto& kv) {
    const auto it = found.find(kv.first);
    return it != found.end() && it->second == kv.second;
  });
}

}  // namespace

ExperimentData generate_experiment_data(const ExperimentConfig& config) {
  return {generate_dataset(config, Split::train, config.n_train), generate_dataset(config, Split::test, config.n_test)};
}

std::filesystem::path dataset_dir(const std::filesystem::path& root, Split split, int resolution) {
  return root / std::string(to_string(split)) / ("n" + std::to_string(resolution));
}

void write_experiment_data(const std::filesystem::path& dir, const ExperimentConfig& config,
                           const ExperimentData& data) {
  for (int r : config.resolutions) {
    write_dataset(dataset_dir(dir, Split::train, r), subsample_dataset(data.train, r));
    write_dataset(dataset_dir(dir, Split::test, r), subsample_dataset(data.test, r));
  }
}

ExperimentData load_or_generate(const std::filesystem::path& dir, const ExperimentConfig& config) {
  const int n = config.finest();
  const auto train_dir = dataset_dir(dir, Split::train, n);
  const auto test_dir = dataset_dir(dir, Split::test, n);
  if (std::filesystem::exists(train_dir / "meta") && std::filesystem::exists(test_dir / "meta")) {
    ExperimentData data{read_dataset(train_dir), read_dataset(test_dir)};
    if (provenance_matches(dataset_provenance(config, Split::train, config.n_train), data.train.provenance) &&
        provenance_matches(dataset_provenance(config, Split::test, config.n_test), data.test.provenance)) {
      return data;
    }
    warn("cached datasets in " + dir.string() + " do not match the config; regenerating");
  }
  ExperimentData data = generate_experiment_data(config);
  write_experiment_data(dir, config, data);
  return data;
}

std::string eval_csv_header() { return "problem,resolution,d,N,regressor,relative_error,online_seconds"; }

std::string to_csv(const EvalRow& r) {
  std::ostringstream out;
  out << r.problem << ',' << r.resolution << ',' << r.d << ',' << r.n_train << ',' << r.regressor << ','
      << fmt(r.relative_error) << ',' << fmt(r.online_seconds);
  return out.str();
}

std::string regressor_name(const Regressor& r) {
  return std::holds_alternative<MlpModel>(r) ? "mlp" : "linear";
}

double online_seconds_per_prediction(const Surrogate& surrogate, const FunctionBatch& inputs) {
  if (inputs.count() == 0) throw UsageError("no inputs to time");
  double sink = norm(predict_function(surrogate, inputs.at(0)));
  const auto t0 = Clock::now();
  for (int i = 0; i < inputs.count(); ++i) sink += predict_function(surrogate, inputs.at(i)).values()[0];
  const double elapsed = seconds_since(t0);
  if (!std::isfinite(sink)) warn("non-finite prediction while timing");
  return elapsed / inputs.count();
}

EvalRow evaluate(const Surrogate& surrogate, ProblemKind problem, int n_train, const Dataset& test, bool transfer) {
  if (test.count() == 0) throw UsageError("the test set is empty");
  const Surrogate* s = &surrogate;
  Surrogate moved;
  if (surrogate.pca_in.grid != test.x.grid) {
    if (!transfer) {
      throw ShapeError("surrogate grid n=" + std::to_string(surrogate.pca_in.grid.n) + " differs from test grid n=" +
                       std::to_string(test.resolution()) + "; enable transfer to evaluate across resolutions");
    }
    moved = transfer_surrogate(surrogate, test.resolution());
    s = &moved;
  }
  EvalRow row;
  row.problem = std::string(to_string(problem));
  row.resolution = test.resolution();
  row.d = s->pca_in.dimension();
  row.n_train = n_train;
  row.regressor = regressor_name(s->regressor);
  row.relative_error = relative_test_error(*s, test.x, test.y).mean;
  row.online_seconds = online_seconds_per_prediction(*s, test.x);
  return row;
}

SurrogateFit fit_cell(const ExperimentConfig& config, const ExperimentData& data, int resolution, int d, int n_train,
                      RegressorKind kind, bool validate_during_training) {
  const Dataset train = subsample_dataset(head(data.train, n_train), resolution);
  const SurrogateFitOptions options = config.fit_options(d, kind);
  if (!validate_during_training) return fit_surrogate(train.x, train.y, options);
  const Dataset test = subsample_dataset(data.test, resolution);
  return fit_surrogate(train.x, train.y, options, &test.x, &test.y);
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::resolution: return "resolution";
    case SweepAxis::dimension: return "dimension";
    case SweepAxis::samples: return "samples";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  if (name == "resolution") return SweepAxis::resolution;
  if (name == "dimension" || name == "d") return SweepAxis::dimension;
  if (name == "samples" || name == "N") return SweepAxis::samples;
  throw UsageError("unknown sweep axis '" + std::string(name) + "' (expected resolution, dimension or samples)");
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config, const ExperimentData& data, const SweepSpec& spec) {
  if (spec.values.empty()) throw UsageError("sweep has no axis values");
  std::vector<SweepCell> cells;
  for (RegressorKind kind : spec.regressors) {
    std::vector<int> values = spec.values;
    std::sort(values.begin(), values.end());
    for (int v : values) {
      SweepCell c;
      c.axis = spec.axis;
      c.value = v;
      c.row.regressor = std::string(to_string(kind));
      cells.push_back(c);
    }
  }
  const int base_resolution = spec.resolution > 0 ? spec.resolution : config.finest();
  const int base_n = spec.n_train > 0 ? spec.n_train : config.n_train;
  parallel_for(static_cast<int>(cells.size()), config.threads, [&](int i) {
    SweepCell& c = cells[static_cast<std::size_t>(i)];
    int resolution = base_resolution, d = spec.d, n = base_n;
    switch (spec.axis) {
      case SweepAxis::resolution: resolution = c.value; break;
      case SweepAxis::dimension: d = c.value; break;
      case SweepAxis::samples: n = c.value; break;
    }
    try {
      const RegressorKind kind = regressor_kind_from_string(c.row.regressor);
      const SurrogateFit fit = fit_cell(config, data, resolution, d, n, kind);
      c.row = evaluate(fit.surrogate, config.problem, n, subsample_dataset(data.test, resolution));
      c.ok = true;
    } catch (const std::exception& e) {
      c.row.problem = std::string(to_string(config.problem));
      c.row.resolution = resolution;
      c.row.d = d;
      c.row.n_train = n;
      c.row.relative_error = std::numeric_limits<double>::quiet_NaN();
      c.row.online_seconds = std::numeric_limits<double>::quiet_NaN();
      c.message = e.what();
      warn("sweep cell " + std::string(to_string(spec.axis)) + "=" + std::to_string(c.value) + " failed: " + e.what());
    }
  });
  return cells;
}

std::string sweep_csv_header() { return "axis,value," + eval_csv_header() + ",status,message"; }

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << sweep_csv_header() << '\n';
  for (const SweepCell& c : cells) {
    out << to_string(c.axis) << ',' << c.value << ',' << to_csv(c.row) << ',' << (c.ok ? "ok" : "failed") << ','
        << csv_escape(c.message) << '\n';
  }
}

std::vector<PlotSeries> sweep_series(const std::vector<SweepCell>& cells) {
  std::vector<PlotSeries> series;
  for (const SweepCell& c : cells) {
    if (!c.ok) continue;
    auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) { return s.label == c.row.regressor; });
    if (it == series.end()) {
      series.push_back({c.row.regressor, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(c.value);
    it->y.push_back(c.row.relative_error);
  }
  return series;
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x, bool log_y) {
  constexpr double width = 640, height = 420, left = 70, right = 130, top = 40, bottom = 50;
  const auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  const auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5 * std::max(std::abs(y0), 1e-3), y1 += 0.5 * std::max(std::abs(y1), 1e-3);
  if (!log_y && y0 > 0) y0 = 0;
  const double pw = width - left - right, ph = height - top - bottom;
  const auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream svg;
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = left + pw * k / 4.0, gy = top + ph * (1.0 - k / 4.0);
    svg << "<text x=\"" << gx << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
        << (log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
        << (log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << gy << "\" x2=\"" << left + pw << "\" y2=\"" << gy
        << "\" stroke=\"#ddd\"/>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(tx(series[s].x[i])) || !std::isfinite(ty(series[s].y[i]))) continue;
      svg << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string transfer_csv_header() {
  return "problem,d,train_resolution,eval_resolution,regressor,native_error,transferred_error,increase,"
         "gram_residual_in,gram_residual_out";
}

std::string to_csv(const TransferRow& r) {
  std::ostringstream out;
  out << r.problem << ',' << r.d << ',' << r.train_resolution << ',' << r.eval_resolution << ',' << r.regressor << ','
      << fmt(r.native_error) << ',' << fmt(r.transferred_error) << ',' << fmt(r.increase) << ','
      << fmt(r.gram_residual_in) << ',' << fmt(r.gram_residual_out);
  return out.str();
}

TransferRow run_transfer(const ExperimentConfig& config, const ExperimentData& data, int d, int train_resolution,
                         int eval_resolution, RegressorKind kind) {
  const SurrogateFit fit = fit_cell(config, data, train_resolution, d, config.n_train, kind);
  const Dataset native_test = subsample_dataset(data.test, train_resolution);
  const Dataset target_test = subsample_dataset(data.test, eval_resolution);
  const Surrogate moved = transfer_surrogate(fit.surrogate, eval_resolution);
  TransferRow row;
  row.problem = std::string(to_string(config.problem));
  row.d = d;
  row.train_resolution = train_resolution;
  row.eval_resolution = eval_resolution;
  row.regressor = std::string(to_string(kind));
  row.native_error = relative_test_error(fit.surrogate, native_test.x, native_test.y).mean;
  row.transferred_error = relative_test_error(moved, target_test.x, target_test.y).mean;
  row.increase = row.transferred_error - row.native_error;
  row.gram_residual_in = moved.pca_in.transfer_gram_residual.value_or(0.0);
  row.gram_residual_out = moved.pca_out.transfer_gram_residual.value_or(0.0);
  return row;
}

EllipticProblem elliptic_problem(ProblemKind problem, const GridFunction& x, const GridFunction& fixed_coefficient) {
  switch (problem) {
    case ProblemKind::linear_elliptic:
      return {fixed_coefficient, x};
    case ProblemKind::poisson:
    case ProblemKind::coeff_model:
      return {GridFunction::constant(x.grid(), 1.0), x};
    case ProblemKind::darcy_lognormal:
    case ProblemKind::darcy_piecewise:
      return {x, GridFunction::constant(x.grid(), 1.0)};
    case ProblemKind::burgers:
      break;
  }
  throw ConfigError("the reduced basis baseline needs an elliptic problem");
}

EvalRow run_rb_baseline(const ExperimentConfig& config, const ExperimentData& data, int resolution, int d) {
  if (config.problem == ProblemKind::burgers) throw ConfigError("the reduced basis baseline needs an elliptic problem");
  const Dataset train = subsample_dataset(data.train, resolution);
  const Dataset test = subsample_dataset(data.test, resolution);
  if (test.count() == 0) throw UsageError("the test set is empty");
  const GridFunction fixed = config.problem == ProblemKind::linear_elliptic
                                 ? linear_elliptic_coefficient(config, resolution)
                                 : GridFunction::constant(train.x.grid, 1.0);
  const ReducedBasis rb(fit_pca(train.y.grid, train.y.columns, d, config.inner_product));

  Eigen::MatrixXd pred(static_cast<Eigen::Index>(test.y.grid.size()), test.count());
  {
    const EllipticProblem p = elliptic_problem(config.problem, test.x.at(0), fixed);
    pred.col(0) = rb.solve(p.a, p.f).values();
  }
  const auto t0 = Clock::now();
  for (int i = 0; i < test.count(); ++i) {
    const EllipticProblem p = elliptic_problem(config.problem, test.x.at(i), fixed);
    pred.col(i) = rb.solve(p.a, p.f).values();
  }
  EvalRow row;
  row.online_seconds = seconds_since(t0) / test.count();
  row.problem = std::string(to_string(config.problem));
  row.resolution = resolution;
  row.d = d;
  row.n_train = train.count();
  row.regressor = "rb";
  row.relative_error = relative_error(FunctionBatch(test.y.grid, std::move(pred)), test.y, config.inner_product).mean;
  return row;
}

}  // namespace pcanet
