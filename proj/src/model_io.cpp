#include "pcanet/model_io.hpp"

#include "pcanet/dataset.hpp"
#include "pcanet/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pcanet {

namespace {

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

void write_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  write_f64(path, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Eigen::VectorXd read_vector(const std::filesystem::path& path, Eigen::Index size) {
  const std::vector<double> v = read_f64(path);
  if (size >= 0 && static_cast<Eigen::Index>(v.size()) != size) {
    throw UsageError(path.string() + " has " + std::to_string(v.size()) + " entries, expected " +
                     std::to_string(size));
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int get_int(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw UsageError("surrogate meta is missing '" + key + "'");
  return std::stoi(it->second);
}

void write_pca(const std::filesystem::path& dir, const std::string& prefix, const PcaModel& pca, KeyValues& meta) {
  meta[prefix + "_domain"] = std::string(to_string(pca.grid.kind));
  meta[prefix + "_resolution"] = std::to_string(pca.grid.n);
  meta[prefix + "_d"] = std::to_string(pca.dimension());
  meta[prefix + "_eigenvalue_count"] = std::to_string(pca.eigenvalues.size());
  meta[prefix + "_inner_product"] = std::string(to_string(pca.inner_product));
  // Stored d x K: one basis function per row.
  write_matrix(dir / (prefix + "_basis.f64"), pca.basis.transpose());
  write_vector(dir / (prefix + "_eigenvalues.f64"), pca.eigenvalues);
}

PcaModel read_pca(const std::filesystem::path& dir, const std::string& prefix, const KeyValues& meta) {
  PcaModel pca;
  pca.grid = Grid{domain_kind_from_string(meta.at(prefix + "_domain")), get_int(meta, prefix + "_resolution")};
  pca.inner_product = inner_product_kind_from_string(meta.at(prefix + "_inner_product"));
  const int d = get_int(meta, prefix + "_d");
  pca.basis = read_matrix(dir / (prefix + "_basis.f64"), d, static_cast<Eigen::Index>(pca.grid.size())).transpose();
  pca.eigenvalues = read_vector(dir / (prefix + "_eigenvalues.f64"), get_int(meta, prefix + "_eigenvalue_count"));
  return pca;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  write_f64(path, std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
  const std::vector<double> v = read_f64(path);
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw UsageError(path.string() + " does not hold a " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " matrix");
  }
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), rows,
                                                                                                  cols);
}

void write_surrogate(const std::filesystem::path& dir, const Surrogate& s) {
  validate(s);
  std::filesystem::create_directories(dir);
  KeyValues meta{{"format_version", std::to_string(kDatasetFormatVersion)}};
  write_pca(dir, "pca_in", s.pca_in, meta);
  write_pca(dir, "pca_out", s.pca_out, meta);
  write_vector(dir / "std_mean.f64", s.standardization.mean);
  write_vector(dir / "std_scale.f64", s.standardization.scale);
  write_vector(dir / "out_mean.f64", s.output_scaling.mean);
  write_vector(dir / "out_scale.f64", s.output_scaling.scale);
  if (const auto* mlp = std::get_if<MlpModel>(&s.regressor)) {
    meta["regressor"] = "mlp";
    meta["dims"] = join(mlp->dims);
    for (std::size_t l = 0; l < mlp->layer_count(); ++l) {
      write_matrix(dir / ("W" + std::to_string(l) + ".f64"), mlp->weights[l]);
      write_vector(dir / ("b" + std::to_string(l) + ".f64"), mlp->biases[l]);
    }
  } else {
    const auto& lin = std::get<LinearModel>(s.regressor);
    meta["regressor"] = "linear";
    meta["dims"] = join({lin.input_dim(), lin.output_dim()});
    write_matrix(dir / "matrix.f64", lin.matrix);
    write_vector(dir / "bias.f64", lin.bias);
  }
  write_key_values(dir / "meta", meta);
}

Surrogate read_surrogate(const std::filesystem::path& dir) {
  const KeyValues meta = read_key_values(dir / "meta");
  if (get_int(meta, "format_version") != kDatasetFormatVersion) {
    throw UsageError("unsupported surrogate format version in " + dir.string());
  }
  Surrogate s;
  s.pca_in = read_pca(dir, "pca_in", meta);
  s.pca_out = read_pca(dir, "pca_out", meta);
  const Eigen::Index din = s.pca_in.dimension();
  const Eigen::Index dout = s.pca_out.dimension();
  s.standardization = {read_vector(dir / "std_mean.f64", din), read_vector(dir / "std_scale.f64", din)};
  s.output_scaling = {read_vector(dir / "out_mean.f64", dout), read_vector(dir / "out_scale.f64", dout)};
  const std::vector<int> dims = parse_int_list(meta.at("dims"));
  if (meta.at("regressor") == "mlp") {
    MlpModel m;
    m.dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      m.weights.push_back(read_matrix(dir / ("W" + std::to_string(l) + ".f64"), dims[l + 1], dims[l]));
      m.biases.push_back(read_vector(dir / ("b" + std::to_string(l) + ".f64"), dims[l + 1]));
    }
    s.regressor = std::move(m);
  } else {
    LinearModel lin{read_matrix(dir / "matrix.f64", dims[1], dims[0]), read_vector(dir / "bias.f64", dims[1])};
    s.regressor = std::move(lin);
  }
  validate(s);
  return s;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << "epoch,train_mse,test_relative_error\n" << std::setprecision(17);
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << r.train_mse << ',';
    if (std::isfinite(r.test_metric)) out << r.test_metric;
    out << '\n';
  }
}

}  // namespace pcanet
