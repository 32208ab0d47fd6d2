#pragma once

#include "pcanet/config.hpp"
#include "pcanet/surrogate.hpp"

#include <filesystem>
#include <vector>

namespace pcanet {

/// Writes a surrogate as a directory: `meta` plus raw little-endian tensors
/// (row-major) for both PCA bases, the scalings and the regressor weights.
void write_surrogate(const std::filesystem::path& dir, const Surrogate& surrogate);
Surrogate read_surrogate(const std::filesystem::path& dir);

/// Row-major write/read of a dense matrix as raw f64.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

/// CSV with columns epoch,train_mse,test_relative_error.
void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace pcanet
