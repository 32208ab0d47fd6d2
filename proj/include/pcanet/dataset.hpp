#pragma once

#include "pcanet/config.hpp"
#include "pcanet/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace pcanet {

inline constexpr int kDatasetFormatVersion = 1;

enum class Split { train, test };
std::string_view to_string(Split split);

/// Input/output pairs on one grid plus provenance. For the coefficient model
/// `xi` holds the generating coefficients column-wise.
struct Dataset {
  ProblemKind problem = ProblemKind::darcy_piecewise;
  FunctionBatch x;
  FunctionBatch y;
  std::optional<Eigen::MatrixXd> xi;
  KeyValues provenance;

  int count() const { return x.count(); }
  int resolution() const { return x.grid.n; }
};

/// Runs body(i) for i in [0, count) on `threads` workers. The first failure is
/// rethrown with its index after all workers stop.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

/// Base seed of a split; sample i uses derive_seed(split_seed, i).
std::uint64_t split_seed(std::uint64_t base, Split split);

/// Ground-truth forward map of the problem on a grid with n points per axis.
ForwardMap forward_map(const ExperimentConfig& config, int n);

/// The fixed coefficient of the linear elliptic problem at resolution n.
GridFunction linear_elliptic_coefficient(const ExperimentConfig& config, int n);

/// Provenance entries recorded in the meta file of a generated dataset.
KeyValues dataset_provenance(const ExperimentConfig& config, Split split, int count);

/// Samples inputs at the finest resolution and solves the forward problem.
Dataset generate_dataset(const ExperimentConfig& config, Split split, int count);

/// Nested subsampling of both x and y (xi is copied).
Dataset subsample_dataset(const Dataset& data, int resolution);

/// First `count` pairs.
Dataset head(const Dataset& data, int count);

/// Writes meta plus x.f64 / y.f64 (and xi.f64) as raw little-endian doubles.
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& dir);

void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path);

/// FNV-1a hash of the raw bytes of the values, as 16 hex digits.
std::string content_hash(const Eigen::MatrixXd& values);

}  // namespace pcanet
