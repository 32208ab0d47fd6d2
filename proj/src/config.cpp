#include "pcanet/config.hpp"

#include "pcanet/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pcanet {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse '" + s + "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("cannot parse '" + s + "' as a boolean for key '" + std::string(key) + "'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << format_key_values(kv);
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_number<int>("list", item));
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_number<double>("list", item));
  }
  return out;
}

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::linear_elliptic: return "linear_elliptic";
    case ProblemKind::poisson: return "poisson";
    case ProblemKind::darcy_lognormal: return "darcy_lognormal";
    case ProblemKind::darcy_piecewise: return "darcy_piecewise";
    case ProblemKind::burgers: return "burgers";
    case ProblemKind::coeff_model: return "coeff_model";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(std::string_view name) {
  for (auto k : {ProblemKind::linear_elliptic, ProblemKind::poisson, ProblemKind::darcy_lognormal,
                 ProblemKind::darcy_piecewise, ProblemKind::burgers, ProblemKind::coeff_model}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

DomainKind problem_domain(ProblemKind kind) {
  return kind == ProblemKind::burgers ? DomainKind::torus1d : DomainKind::box2d;
}

int ExperimentConfig::finest() const { return *std::max_element(resolutions.begin(), resolutions.end()); }

int ExperimentConfig::effective_cutoff() const {
  if (cutoff >= 0) return cutoff;
  return Grid{problem_domain(problem), finest()}.nyquist();
}

MeasureSpec ExperimentConfig::measure() const {
  const int k = effective_cutoff();
  switch (problem) {
    case ProblemKind::linear_elliptic:
    case ProblemKind::poisson: return MeasureSpec::mu_G(k);
    case ProblemKind::darcy_lognormal: return MeasureSpec::mu_L(k);
    case ProblemKind::darcy_piecewise: return MeasureSpec::mu_P(k);
    case ProblemKind::burgers: return MeasureSpec::mu_B(k);
    case ProblemKind::coeff_model: return MeasureSpec::coeff_model(k);
  }
  throw ConfigError("unknown problem");
}

CgOptions ExperimentConfig::cg_options() const {
  CgOptions o;
  o.relative_tolerance = cg_tolerance;
  return o;
}

SurrogateFitOptions ExperimentConfig::fit_options(int d, RegressorKind kind) const {
  SurrogateFitOptions o;
  o.d_in = d;
  o.d_out = d;
  o.regressor = kind;
  o.hidden_widths = hidden_widths;
  o.train = train;
  o.input_scaling = input_scaling;
  o.scale_outputs = scale_outputs;
  o.inner_product = inner_product;
  return o;
}

ExperimentConfig default_config(ProblemKind problem) {
  ExperimentConfig c;
  c.problem = problem;
  if (problem == ProblemKind::burgers) {
    c.resolutions = {256, 512, 1024};
  } else if (problem == ProblemKind::coeff_model) {
    c.resolutions = {65};
    c.cutoff = 40;
    c.coeff_modes = 1024;
    c.dims = {8, 16, 32, 64};
  }
  return c;
}

void apply_overrides(ExperimentConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "problem") {
      c.problem = problem_kind_from_string(value);
    } else if (key == "resolutions") {
      c.resolutions = parse_int_list(value);
    } else if (key == "n_train") {
      c.n_train = parse_number<int>(key, value);
    } else if (key == "n_test") {
      c.n_test = parse_number<int>(key, value);
    } else if (key == "dims") {
      c.dims = parse_int_list(value);
    } else if (key == "regressor") {
      c.regressor = regressor_kind_from_string(value);
    } else if (key == "hidden_widths") {
      c.hidden_widths = parse_int_list(value);
    } else if (key == "learning_rates") {
      c.train.learning_rates = parse_double_list(value);
    } else if (key == "momentum") {
      c.train.momentum = parse_number<double>(key, value);
    } else if (key == "batch_size") {
      c.train.batch_size = parse_number<int>(key, value);
    } else if (key == "epochs") {
      c.train.epochs = parse_number<int>(key, value);
    } else if (key == "train_seed") {
      c.train.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "blowup_factor") {
      c.train.blowup_factor = parse_number<double>(key, value);
    } else if (key == "eval_every") {
      c.train.eval_every = parse_number<int>(key, value);
    } else if (key == "input_scaling") {
      c.input_scaling = input_scaling_from_string(value);
    } else if (key == "scale_outputs") {
      c.scale_outputs = parse_bool(key, value);
    } else if (key == "inner_product") {
      c.inner_product = inner_product_kind_from_string(value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "coefficient_seed") {
      c.coefficient_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "cutoff") {
      c.cutoff = parse_number<int>(key, value);
    } else if (key == "coeff_modes") {
      c.coeff_modes = parse_number<int>(key, value);
    } else if (key == "viscosity") {
      c.viscosity = parse_number<double>(key, value);
    } else if (key == "t_final") {
      c.t_final = parse_number<double>(key, value);
    } else if (key == "cg_tolerance") {
      c.cg_tolerance = parse_number<double>(key, value);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else if (key == "threads") {
      c.threads = parse_number<int>(key, value);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  const auto it = kv.find("problem");
  ExperimentConfig c = default_config(it == kv.end() ? ProblemKind::darcy_piecewise : problem_kind_from_string(it->second));
  apply_overrides(c, kv);
  return c;
}

KeyValues to_key_values(const ExperimentConfig& c) {
  return {{"problem", std::string(to_string(c.problem))},
          {"resolutions", join(c.resolutions)},
          {"n_train", std::to_string(c.n_train)},
          {"n_test", std::to_string(c.n_test)},
          {"dims", join(c.dims)},
          {"regressor", std::string(to_string(c.regressor))},
          {"hidden_widths", join(c.hidden_widths)},
          {"learning_rates", join(c.train.learning_rates)},
          {"momentum", format_double(c.train.momentum)},
          {"batch_size", std::to_string(c.train.batch_size)},
          {"epochs", std::to_string(c.train.epochs)},
          {"train_seed", std::to_string(c.train.seed)},
          {"blowup_factor", format_double(c.train.blowup_factor)},
          {"eval_every", std::to_string(c.train.eval_every)},
          {"input_scaling", std::string(to_string(c.input_scaling))},
          {"scale_outputs", c.scale_outputs ? "true" : "false"},
          {"inner_product", std::string(to_string(c.inner_product))},
          {"seed", std::to_string(c.seed)},
          {"coefficient_seed", std::to_string(c.coefficient_seed)},
          {"cutoff", std::to_string(c.cutoff)},
          {"coeff_modes", std::to_string(c.coeff_modes)},
          {"viscosity", format_double(c.viscosity)},
          {"t_final", format_double(c.t_final)},
          {"cg_tolerance", format_double(c.cg_tolerance)},
          {"output_dir", c.output_dir.string()},
          {"threads", std::to_string(c.threads)}};
}

void validate(const ExperimentConfig& c) {
  if (c.resolutions.empty()) throw ConfigError("at least one resolution is required");
  const Grid fine{problem_domain(c.problem), c.finest()};
  validate(fine);
  for (int r : c.resolutions) {
    if (nesting_stride(fine, Grid{fine.kind, r}) == 0) {
      throw ConfigError("resolution " + std::to_string(r) + " is not nested in the finest resolution " +
                        std::to_string(fine.n));
    }
  }
  if (c.problem == ProblemKind::burgers && (fine.n & (fine.n - 1)) != 0) {
    throw ConfigError("Burgers resolutions must be powers of two");
  }
  if (c.n_train < 1 || c.n_test < 0) throw ConfigError("sample counts must be positive");
  if (!c.dims.empty() && *std::max_element(c.dims.begin(), c.dims.end()) > c.n_train) {
    throw ConfigError("n_train must be at least the largest reduced dimension");
  }
  if (c.effective_cutoff() > fine.nyquist()) throw ConfigError("cutoff exceeds the Nyquist limit of the finest grid");
  validate(c.measure());
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
}

std::filesystem::path resolve_output(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("PCANET_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / path;
  return path;
}

}  // namespace pcanet
