#include "pcanet/grid.hpp"

#include "pcanet/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pcanet {

std::string_view to_string(DomainKind kind) {
  return kind == DomainKind::box2d ? "box2d" : "torus1d";
}

DomainKind domain_kind_from_string(std::string_view name) {
  if (name == "box2d") return DomainKind::box2d;
  if (name == "torus1d") return DomainKind::torus1d;
  throw ConfigError("unknown domain kind '" + std::string(name) + "'");
}

std::string_view to_string(InnerProductKind kind) {
  return kind == InnerProductKind::weighted ? "weighted" : "euclidean";
}

InnerProductKind inner_product_kind_from_string(std::string_view name) {
  if (name == "weighted") return InnerProductKind::weighted;
  if (name == "euclidean") return InnerProductKind::euclidean;
  throw ConfigError("unknown inner product kind '" + std::string(name) + "'");
}

void validate(const Grid& grid) {
  const int min_n = grid.kind == DomainKind::box2d ? 2 : 1;
  if (grid.n < min_n) {
    throw ShapeError("resolution " + std::to_string(grid.n) + " too small for " +
                     std::string(to_string(grid.kind)));
  }
}

Eigen::VectorXd quadrature_weights(const Grid& grid) {
  validate(grid);
  const int n = grid.n;
  if (grid.kind == DomainKind::torus1d) return Eigen::VectorXd::Constant(n, 1.0 / n);

  const double h = grid.spacing();
  Eigen::VectorXd axis = Eigen::VectorXd::Constant(n, h);
  axis[0] = axis[n - 1] = 0.5 * h;
  Eigen::VectorXd w(grid.size());
  for (int i = 0; i < n; ++i) {
    w.segment(static_cast<Eigen::Index>(i) * n, n) = axis[i] * axis;
  }
  return w;
}

Eigen::VectorXd inner_product_weights(const Grid& grid, InnerProductKind kind) {
  if (kind == InnerProductKind::weighted) return quadrature_weights(grid);
  validate(grid);
  return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.size()));
}

GridFunction::GridFunction(Grid grid, Eigen::VectorXd values) : grid_(grid), values_(std::move(values)) {
  validate(grid_);
  if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
    throw ShapeError("grid function has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(grid_.size()));
  }
  if (!values_.allFinite()) throw DomainError("grid function values must be finite");
}

GridFunction GridFunction::zeros(Grid grid) { return constant(grid, 0.0); }

GridFunction GridFunction::constant(Grid grid, double value) {
  validate(grid);
  return GridFunction(grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), value));
}

GridFunction GridFunction::from_function(Grid grid, const std::function<double(double, double)>& f) {
  validate(grid);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  if (grid.kind == DomainKind::torus1d) {
    for (int i = 0; i < grid.n; ++i) v[i] = f(grid.coord(i), 0.0);
  } else {
    for (int i = 0; i < grid.n; ++i) {
      for (int j = 0; j < grid.n; ++j) v[static_cast<Eigen::Index>(i) * grid.n + j] = f(grid.coord(j), grid.coord(i));
    }
  }
  return GridFunction(grid, std::move(v));
}

static void require_same_grid(const GridFunction& u, const GridFunction& v) {
  if (u.grid() != v.grid()) {
    throw ShapeError("grid mismatch: " + std::string(to_string(u.kind())) + " n=" + std::to_string(u.resolution()) +
                     " vs " + std::string(to_string(v.kind())) + " n=" + std::to_string(v.resolution()));
  }
}

double inner_product(const GridFunction& u, const GridFunction& v, InnerProductKind kind) {
  require_same_grid(u, v);
  if (kind == InnerProductKind::euclidean) return u.values().dot(v.values());
  return (quadrature_weights(u.grid()).array() * u.values().array() * v.values().array()).sum();
}

double norm(const GridFunction& u, InnerProductKind kind) { return std::sqrt(inner_product(u, u, kind)); }

GridFunction subsample(const GridFunction& u, int stride) {
  const Grid& g = u.grid();
  if (stride < 1) throw ShapeError("stride must be positive");
  if (g.kind == DomainKind::torus1d) {
    if (g.n % stride != 0) {
      throw ShapeError("torus resolution " + std::to_string(g.n) + " not divisible by stride " + std::to_string(stride));
    }
    const Grid coarse{g.kind, g.n / stride};
    Eigen::VectorXd v(coarse.n);
    for (int i = 0; i < coarse.n; ++i) v[i] = u[static_cast<std::size_t>(i) * stride];
    return GridFunction(coarse, std::move(v));
  }
  if ((g.n - 1) % stride != 0) {
    throw ShapeError("box resolution " + std::to_string(g.n) + " minus one not divisible by stride " +
                     std::to_string(stride));
  }
  const Grid coarse{g.kind, (g.n - 1) / stride + 1};
  Eigen::VectorXd v(static_cast<Eigen::Index>(coarse.size()));
  for (int i = 0; i < coarse.n; ++i) {
    for (int j = 0; j < coarse.n; ++j) v[static_cast<Eigen::Index>(i) * coarse.n + j] = u.at(i * stride, j * stride);
  }
  return GridFunction(coarse, std::move(v));
}

namespace {

// Second derivatives of the natural cubic spline through y at unit-spaced
// nodes (Thomas algorithm on the standard 1-4-1 system).
std::vector<double> natural_second_derivatives(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  const std::size_t k = n - 2;
  std::vector<double> c(k), d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]);
  c[0] = 1.0 / 4.0;
  d[0] /= 4.0;
  for (std::size_t i = 1; i < k; ++i) {
    const double denom = 4.0 - c[i - 1];
    c[i] = 1.0 / denom;
    d[i] = (d[i] - d[i - 1]) / denom;
  }
  m[k] = d[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = d[i] - c[i] * m[i + 2];
  return m;
}

// Second derivatives of the periodic cubic spline: cyclic 1-4-1 system solved
// with the Sherman-Morrison correction.
std::vector<double> periodic_second_derivatives(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]);
  }
  // A = T + u v^T with T tridiagonal; gamma = -diag.
  const double gamma = -4.0;
  std::vector<double> diag(n, 4.0);
  diag[0] -= gamma;
  diag[n - 1] -= 1.0 / gamma;
  auto solve_tridiag = [&](std::vector<double> r) {
    std::vector<double> cp(n), x(n);
    cp[0] = 1.0 / diag[0];
    r[0] /= diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double denom = diag[i] - cp[i - 1];
      cp[i] = 1.0 / denom;
      r[i] = (r[i] - r[i - 1]) / denom;
    }
    x[n - 1] = r[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = r[i] - cp[i] * x[i + 1];
    return x;
  };
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = 1.0;
  const std::vector<double> x = solve_tridiag(rhs);
  const std::vector<double> z = solve_tridiag(u);
  const double vx = x[0] + x[n - 1] / gamma;
  const double vz = z[0] + z[n - 1] / gamma;
  const double factor = vx / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) m[i] = x[i] - factor * z[i];
  return m;
}

// Evaluates a unit-spaced cubic spline with node values y and second
// derivatives m at position x (in index units), interval index `lo`.
double spline_eval(const std::vector<double>& y, const std::vector<double>& m, std::size_t lo, std::size_t hi,
                   double t) {
  const double a = 1.0 - t;
  return a * y[lo] + t * y[hi] + ((a * a * a - a) * m[lo] + (t * t * t - t) * m[hi]) / 6.0;
}

// Resamples one line of values onto `target` points.
std::vector<double> resample_line(const std::vector<double>& y, int target, bool periodic) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(static_cast<std::size_t>(target));
  if (!periodic && n == 2) {
    for (int k = 0; k < target; ++k) {
      const double t = static_cast<double>(k) / (target - 1);
      out[static_cast<std::size_t>(k)] = (1.0 - t) * y[0] + t * y[1];
    }
    return out;
  }
  const std::vector<double> m = periodic ? periodic_second_derivatives(y) : natural_second_derivatives(y);
  for (int k = 0; k < target; ++k) {
    // Position in source index units; exact integer when the nodes coincide.
    const double x = periodic ? static_cast<double>(k) * n / target
                              : static_cast<double>(k) * (n - 1) / (target - 1);
    int lo = static_cast<int>(std::floor(x));
    if (!periodic) lo = std::clamp(lo, 0, n - 2);
    const double t = x - lo;
    const int hi = periodic ? (lo + 1) % n : lo + 1;
    if (t == 0.0) {
      out[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(lo % n)];
    } else {
      out[static_cast<std::size_t>(k)] =
          spline_eval(y, m, static_cast<std::size_t>(lo % n), static_cast<std::size_t>(hi), t);
    }
  }
  return out;
}

}  // namespace

GridFunction interpolate(const GridFunction& u, int target_n) {
  if (target_n < 2) throw ShapeError("interpolation target resolution must be at least 2");
  const Grid& g = u.grid();
  if (g.kind == DomainKind::torus1d) {
    std::vector<double> y(u.values().data(), u.values().data() + u.size());
    const std::vector<double> r = resample_line(y, target_n, true);
    return GridFunction(Grid{g.kind, target_n}, Eigen::Map<const Eigen::VectorXd>(r.data(), target_n));
  }
  const int n = g.n;
  // Along s1 (rows) first, then along s2 (columns).
  Eigen::MatrixXd rows(n, target_n);
  std::vector<double> line(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = u.at(i, j);
    const std::vector<double> r = resample_line(line, target_n, false);
    for (int j = 0; j < target_n; ++j) rows(i, j) = r[static_cast<std::size_t>(j)];
  }
  const Grid target{g.kind, target_n};
  Eigen::VectorXd v(static_cast<Eigen::Index>(target.size()));
  for (int j = 0; j < target_n; ++j) {
    for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = rows(i, j);
    const std::vector<double> c = resample_line(line, target_n, false);
    for (int i = 0; i < target_n; ++i) v[static_cast<Eigen::Index>(i) * target_n + j] = c[static_cast<std::size_t>(i)];
  }
  return GridFunction(target, std::move(v));
}

int nesting_stride(const Grid& fine, const Grid& coarse) {
  if (fine.kind != coarse.kind || coarse.n < 1 || coarse.n > fine.n) return 0;
  if (fine.kind == DomainKind::torus1d) return fine.n % coarse.n == 0 ? fine.n / coarse.n : 0;
  if (coarse.n < 2) return 0;
  return (fine.n - 1) % (coarse.n - 1) == 0 ? (fine.n - 1) / (coarse.n - 1) : 0;
}

GridFunction resample(const GridFunction& u, int target_n) {
  const Grid target{u.kind(), target_n};
  validate(target);
  if (target_n == u.resolution()) return u;
  if (target_n > u.resolution()) return interpolate(u, target_n);
  const int stride = nesting_stride(u.grid(), target);
  if (stride == 0) {
    throw ShapeError("resolution " + std::to_string(target_n) + " is not nested in " +
                     std::to_string(u.resolution()));
  }
  return subsample(u, stride);
}

GridFunction operator+(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v);
  return GridFunction(u.grid(), u.values() + v.values());
}

GridFunction operator-(const GridFunction& u, const GridFunction& v) {
  require_same_grid(u, v);
  return GridFunction(u.grid(), u.values() - v.values());
}

GridFunction operator*(double a, const GridFunction& u) { return GridFunction(u.grid(), a * u.values()); }

}  // namespace pcanet

namespace pcanet {

FunctionBatch::FunctionBatch(Grid g, Eigen::MatrixXd c) : grid(g), columns(std::move(c)) {
  validate(grid);
  if (static_cast<std::size_t>(columns.rows()) != grid.size()) {
    throw ShapeError("batch rows " + std::to_string(columns.rows()) + " do not match grid size " +
                     std::to_string(grid.size()));
  }
}

FunctionBatch FunctionBatch::from_functions(const std::vector<GridFunction>& functions) {
  if (functions.empty()) throw ShapeError("cannot build a batch from zero functions");
  const Grid g = functions.front().grid();
  Eigen::MatrixXd c(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(functions.size()));
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].grid() != g) throw ShapeError("batch functions must share one grid");
    c.col(static_cast<Eigen::Index>(i)) = functions[i].values();
  }
  return FunctionBatch(g, std::move(c));
}

std::vector<GridFunction> FunctionBatch::functions() const {
  std::vector<GridFunction> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (int i = 0; i < count(); ++i) out.push_back(at(i));
  return out;
}

FunctionBatch FunctionBatch::head(int n) const { return slice(0, n); }

FunctionBatch FunctionBatch::slice(int start, int n) const {
  if (start < 0 || n < 0 || start + n > count()) throw ShapeError("batch slice out of range");
  return FunctionBatch(grid, columns.middleCols(start, n));
}

FunctionBatch resample(const FunctionBatch& batch, int target_n) {
  if (target_n == batch.grid.n) return batch;
  const Grid target{batch.grid.kind, target_n};
  Eigen::MatrixXd c(static_cast<Eigen::Index>(target.size()), batch.columns.cols());
  for (int i = 0; i < batch.count(); ++i) c.col(i) = resample(batch.at(i), target_n).values();
  return FunctionBatch(target, std::move(c));
}

Eigen::VectorXd column_norms(const FunctionBatch& batch, InnerProductKind kind) {
  const Eigen::VectorXd w = inner_product_weights(batch.grid, kind);
  return (w.asDiagonal() * batch.columns.cwiseAbs2()).colwise().sum().cwiseSqrt().transpose();
}

}  // namespace pcanet
