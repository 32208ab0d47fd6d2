#pragma once

#include "pcanet/grid.hpp"
#include "pcanet/pde.hpp"
#include "pcanet/random_fields.hpp"
#include "pcanet/regressors.hpp"
#include "pcanet/surrogate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pcanet {

/// Flat "key = value" text. Blank lines and lines starting with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

enum class ProblemKind { linear_elliptic, poisson, darcy_lognormal, darcy_piecewise, burgers, coeff_model };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);
DomainKind problem_domain(ProblemKind kind);

/// Everything needed to regenerate an experiment bit for bit.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::darcy_piecewise;
  std::vector<int> resolutions{17, 33, 65, 129};
  int n_train = 256;
  int n_test = 500;
  std::vector<int> dims{10, 20, 30, 60};
  RegressorKind regressor = RegressorKind::mlp;
  std::vector<int> hidden_widths = default_hidden_widths();
  TrainConfig train;
  InputScaling input_scaling = InputScaling::uniform;
  bool scale_outputs = true;
  InnerProductKind inner_product = InnerProductKind::weighted;
  std::uint64_t seed = 1;
  /// Seed of the fixed coefficient in the linear elliptic problem.
  std::uint64_t coefficient_seed = 7;
  /// Per-axis KL cutoff; -1 selects the Nyquist wavenumber of the finest grid.
  int cutoff = -1;
  /// Number of ordered modes in the coefficient model (0 = all within cutoff).
  int coeff_modes = 0;
  double viscosity = 1e-2;
  double t_final = 1.0;
  double cg_tolerance = 1e-10;
  std::filesystem::path output_dir = "out";
  int threads = 1;

  int finest() const;
  int effective_cutoff() const;
  MeasureSpec measure() const;
  CgOptions cg_options() const;
  SurrogateFitOptions fit_options(int d, RegressorKind kind) const;
};

/// Desk-scale defaults for a problem (grid sizes, cutoffs, sample counts).
ExperimentConfig default_config(ProblemKind problem);

/// Applies key/value overrides; unknown keys raise ConfigError.
void apply_overrides(ExperimentConfig& config, const KeyValues& kv);
ExperimentConfig config_from_key_values(const KeyValues& kv);
KeyValues to_key_values(const ExperimentConfig& config);

/// Throws ConfigError unless resolutions nest into the finest grid, sample
/// counts cover the largest dimension, and the cutoff is representable.
void validate(const ExperimentConfig& config);

std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

/// Resolves relative output paths against $PCANET_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

}  // namespace pcanet
