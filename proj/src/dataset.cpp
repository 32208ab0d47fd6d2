#include "pcanet/dataset.hpp"

#include "pcanet/error.hpp"
#include "pcanet/random_fields.hpp"

#include <atomic>
#include <bit>
#include <cstring>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace pcanet {

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < std::min(threads, count); ++t) {
      workers.emplace_back([&] {
        for (int i = next++; i < count && !stop; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t split_seed(std::uint64_t base, Split split) {
  return derive_seed(base, split == Split::train ? 0x7472616eULL : 0x74657374ULL);
}

GridFunction linear_elliptic_coefficient(const ExperimentConfig& config, int n) {
  const GridFunction fine = sample_mu_P(MeasureSpec::mu_P(config.effective_cutoff()), config.finest(),
                                        config.coefficient_seed);
  return resample(fine, n);
}

ForwardMap forward_map(const ExperimentConfig& config, int n) {
  const CgOptions cg = config.cg_options();
  switch (config.problem) {
    case ProblemKind::linear_elliptic: {
      const GridFunction a = linear_elliptic_coefficient(config, n);
      return [a, cg](const GridFunction& f) { return solve_darcy({a, f}, cg); };
    }
    case ProblemKind::poisson:
    case ProblemKind::coeff_model:
      return [cg](const GridFunction& f) { return solve_poisson(f, cg); };
    case ProblemKind::darcy_lognormal:
    case ProblemKind::darcy_piecewise:
      return [cg](const GridFunction& a) { return solve_darcy({a, GridFunction::constant(a.grid(), 1.0)}, cg); };
    case ProblemKind::burgers: {
      const double beta = config.viscosity;
      const double t = config.t_final;
      return [beta, t](const GridFunction& u0) { return solve_burgers({u0, beta, t}); };
    }
  }
  throw ConfigError("unknown problem");
}

KeyValues dataset_provenance(const ExperimentConfig& config, Split split, int count) {
  const int resolution = config.finest();
  const MeasureSpec m = config.measure();
  std::ostringstream shift, exponent, scale;
  shift << std::setprecision(17) << m.shift;
  exponent << std::setprecision(17) << m.exponent;
  scale << std::setprecision(17) << m.scale;
  KeyValues kv{{"format_version", std::to_string(kDatasetFormatVersion)},
               {"problem", std::string(to_string(config.problem))},
               {"split", std::string(to_string(split))},
               {"count", std::to_string(count)},
               {"resolution", std::to_string(resolution)},
               {"domain", std::string(to_string(problem_domain(config.problem)))},
               {"generated_resolution", std::to_string(config.finest())},
               {"measure", std::string(to_string(m.kind))},
               {"measure_shift", shift.str()},
               {"measure_exponent", exponent.str()},
               {"measure_scale", scale.str()},
               {"measure_cutoff", std::to_string(m.cutoff)},
               {"seed", std::to_string(config.seed)},
               {"split_seed", std::to_string(split_seed(config.seed, split))}};
  switch (config.problem) {
    case ProblemKind::burgers: {
      std::ostringstream v, t;
      v << std::setprecision(17) << config.viscosity;
      t << std::setprecision(17) << config.t_final;
      kv["solver"] = "burgers_pseudospectral_ifrk4";
      kv["viscosity"] = v.str();
      kv["t_final"] = t.str();
      break;
    }
    default: {
      std::ostringstream tol;
      tol << std::setprecision(17) << config.cg_tolerance;
      kv["solver"] = "darcy_fd5_harmonic_pcg";
      kv["cg_tolerance"] = tol.str();
      break;
    }
  }
  if (config.problem == ProblemKind::linear_elliptic) kv["coefficient_seed"] = std::to_string(config.coefficient_seed);
  if (config.problem == ProblemKind::coeff_model) kv["coeff_modes"] = std::to_string(config.coeff_modes);
  return kv;
}

namespace {

int coeff_mode_count(const ExperimentConfig& config) {
  const int available = (config.effective_cutoff() + 1) * (config.effective_cutoff() + 1);
  if (config.coeff_modes <= 0) return available;
  if (config.coeff_modes > available) throw ConfigError("coeff_modes exceeds the modes within the cutoff");
  return config.coeff_modes;
}

}  // namespace

Dataset generate_dataset(const ExperimentConfig& config, Split split, int count) {
  validate(config);
  const int n = config.finest();
  const Grid grid{problem_domain(config.problem), n};
  const MeasureSpec spec = config.measure();
  const std::uint64_t base = split_seed(config.seed, split);
  const ForwardMap forward = forward_map(config, n);

  Dataset data;
  data.problem = config.problem;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(grid.size()), count);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(grid.size()), count);
  std::optional<Eigen::MatrixXd> xi;
  const int modes = config.problem == ProblemKind::coeff_model ? coeff_mode_count(config) : 0;
  if (modes > 0) xi = Eigen::MatrixXd(modes, count);

  parallel_for(count, config.threads, [&](int i) {
    const std::uint64_t seed = derive_seed(base, static_cast<std::uint64_t>(i));
    try {
      GridFunction input;
      if (config.problem == ProblemKind::coeff_model) {
        CoeffSample s = sample_coeff_model(spec, modes, n, seed);
        xi->col(i) = s.xi;
        input = std::move(s.field);
      } else {
        input = sample_field(spec, n, seed);
      }
      const GridFunction output = forward(input);
      x.col(i) = input.values();
      y.col(i) = output.values();
    } catch (const Error& e) {
      throw NumericalError("sample " + std::to_string(i) + " (" + std::string(to_string(split)) + "): " + e.what());
    }
  });
  data.x = FunctionBatch(grid, std::move(x));
  data.y = FunctionBatch(grid, std::move(y));
  data.xi = std::move(xi);
  data.provenance = dataset_provenance(config, split, count);
  return data;
}

Dataset subsample_dataset(const Dataset& data, int resolution) {
  Dataset out = data;
  if (resolution == data.resolution()) return out;
  const int stride = nesting_stride(data.x.grid, Grid{data.x.grid.kind, resolution});
  if (stride == 0 || resolution > data.resolution()) {
    throw ShapeError("resolution " + std::to_string(resolution) + " is not a nested coarsening of " +
                     std::to_string(data.resolution()));
  }
  out.x = resample(data.x, resolution);
  out.y = resample(data.y, resolution);
  out.provenance["resolution"] = std::to_string(resolution);
  return out;
}

Dataset head(const Dataset& data, int count) {
  if (count > data.count()) throw ConfigError("requested more samples than the dataset holds");
  Dataset out;
  out.problem = data.problem;
  out.x = data.x.head(count);
  out.y = data.y.head(count);
  if (data.xi) out.xi = data.xi->leftCols(count);
  out.provenance = data.provenance;
  out.provenance["count"] = std::to_string(count);
  return out;
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffULL) << (8 * (7 - b));
  return r;
}

// Column-major batch (points x count) to row-major sample-major bytes.
void write_batch(const std::filesystem::path& path, const Eigen::MatrixXd& columns) {
  write_f64(path, std::span<const double>(columns.data(), static_cast<std::size_t>(columns.size())));
}

Eigen::MatrixXd read_batch(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
  const std::vector<double> v = read_f64(path);
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw UsageError(path.string() + " holds " + std::to_string(v.size() * 8) + " bytes, expected " +
                     std::to_string(rows * cols * 8));
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

int require_int(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw UsageError("dataset meta is missing '" + key + "'");
  return std::stoi(it->second);
}

}  // namespace

void write_f64(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  std::vector<std::uint64_t> buf(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
  if (!out) throw UsageError("failed writing " + path.string());
}

std::vector<double> read_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw UsageError("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 8 != 0) throw UsageError(path.string() + " is not a whole number of 64-bit floats");
  in.seekg(0);
  std::vector<std::uint64_t> buf(bytes / 8);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = std::bit_cast<double>(to_little_endian(buf[i]));
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  KeyValues meta = data.provenance;
  meta["format_version"] = std::to_string(kDatasetFormatVersion);
  meta["problem"] = std::string(to_string(data.problem));
  meta["domain"] = std::string(to_string(data.x.grid.kind));
  meta["resolution"] = std::to_string(data.resolution());
  meta["count"] = std::to_string(data.count());
  meta["n_points"] = std::to_string(data.x.grid.size());
  meta["x_shape"] = std::to_string(data.count()) + "," + std::to_string(data.x.grid.size());
  meta["y_shape"] = std::to_string(data.count()) + "," + std::to_string(data.y.grid.size());
  write_batch(dir / "x.f64", data.x.columns);
  write_batch(dir / "y.f64", data.y.columns);
  if (data.xi) {
    meta["xi_shape"] = std::to_string(data.count()) + "," + std::to_string(data.xi->rows());
    write_batch(dir / "xi.f64", *data.xi);
  }
  write_key_values(dir / "meta", meta);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const KeyValues meta = read_key_values(dir / "meta");
  if (require_int(meta, "format_version") != kDatasetFormatVersion) {
    throw UsageError("unsupported dataset format version in " + dir.string());
  }
  Dataset data;
  data.problem = problem_kind_from_string(meta.at("problem"));
  const Grid grid{domain_kind_from_string(meta.at("domain")), require_int(meta, "resolution")};
  const int count = require_int(meta, "count");
  const auto rows = static_cast<Eigen::Index>(grid.size());
  data.x = FunctionBatch(grid, read_batch(dir / "x.f64", rows, count));
  data.y = FunctionBatch(grid, read_batch(dir / "y.f64", rows, count));
  if (const auto it = meta.find("xi_shape"); it != meta.end()) {
    const std::vector<int> shape = parse_int_list(it->second);
    if (shape.size() != 2 || shape[0] != count) throw UsageError("malformed xi_shape in " + dir.string());
    data.xi = read_batch(dir / "xi.f64", shape[1], count);
  }
  data.provenance = meta;
  return data;
}

std::string content_hash(const Eigen::MatrixXd& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(values.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace pcanet
