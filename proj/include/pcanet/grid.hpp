#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pcanet {

enum class DomainKind { box2d, torus1d };

std::string_view to_string(DomainKind kind);
DomainKind domain_kind_from_string(std::string_view name);

/// Uniform grid on the unit square (boundary nodes included, spacing 1/(n-1))
/// or on the unit torus (nodes at i/n, no duplicated endpoint).
struct Grid {
  DomainKind kind = DomainKind::box2d;
  int n = 0;  ///< points per axis

  std::size_t size() const {
    return kind == DomainKind::box2d ? static_cast<std::size_t>(n) * n : static_cast<std::size_t>(n);
  }
  /// Node spacing along an axis.
  double spacing() const { return kind == DomainKind::box2d ? 1.0 / (n - 1) : 1.0 / n; }
  /// Coordinate of the i-th node along an axis.
  /// Computed as a quotient so nested grids produce bit-identical nodes.
  double coord(int i) const { return kind == DomainKind::box2d ? i / double(n - 1) : i / double(n); }
  /// Highest wavenumber the grid can represent without aliasing.
  int nyquist() const { return kind == DomainKind::box2d ? n - 1 : n / 2 - 1; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws ShapeError if the resolution is not usable for the domain.
void validate(const Grid& grid);

/// Quadrature weights for the L2 inner product: trapezoid on the box
/// (h^2 times 1, 1/2, 1/4 for interior, edge, corner), 1/n on the torus.
Eigen::VectorXd quadrature_weights(const Grid& grid);

/// A real function sampled on a Grid. Box values are row-major with
/// index i*n + j, where i is the s2 (vertical) index and j the s1 index.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Grid grid, Eigen::VectorXd values);

  static GridFunction zeros(Grid grid);
  static GridFunction constant(Grid grid, double value);
  /// Box: f(s1, s2). Torus: f(s, 0).
  static GridFunction from_function(Grid grid, const std::function<double(double, double)>& f);

  const Grid& grid() const { return grid_; }
  DomainKind kind() const { return grid_.kind; }
  int resolution() const { return grid_.n; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }
  /// Box accessor: row i (s2), column j (s1).
  double at(int i, int j) const { return values_[static_cast<Eigen::Index>(i) * grid_.n + j]; }

 private:
  Grid grid_{};
  Eigen::VectorXd values_;
};

/// How grid values are paired in inner products.
enum class InnerProductKind { weighted, euclidean };

std::string_view to_string(InnerProductKind kind);
InnerProductKind inner_product_kind_from_string(std::string_view name);

/// Weights for the chosen inner product (all ones for euclidean).
Eigen::VectorXd inner_product_weights(const Grid& grid, InnerProductKind kind);

double inner_product(const GridFunction& u, const GridFunction& v,
                     InnerProductKind kind = InnerProductKind::weighted);
double norm(const GridFunction& u, InnerProductKind kind = InnerProductKind::weighted);

/// Keeps every stride-th node (both boundaries included on the box).
GridFunction subsample(const GridFunction& u, int stride);

/// Natural cubic spline (tensor product) on the box, periodic cubic spline on
/// the torus, evaluated on the grid with target_n points per axis.
GridFunction interpolate(const GridFunction& u, int target_n);

/// Stride mapping a fine grid onto a nested coarse one, or 0 if not nested.
int nesting_stride(const Grid& fine, const Grid& coarse);

/// Moves u to a grid with target_n points per axis: identity, subsampling
/// when target is coarser and nested, spline interpolation when finer.
GridFunction resample(const GridFunction& u, int target_n);

GridFunction operator+(const GridFunction& u, const GridFunction& v);
GridFunction operator-(const GridFunction& u, const GridFunction& v);
GridFunction operator*(double a, const GridFunction& u);

}  // namespace pcanet

namespace pcanet {

/// Many functions on one grid, stored as columns.
struct FunctionBatch {
  Grid grid;
  Eigen::MatrixXd columns;  ///< grid.size() x count

  FunctionBatch() = default;
  FunctionBatch(Grid g, Eigen::MatrixXd c);
  static FunctionBatch from_functions(const std::vector<GridFunction>& functions);

  int count() const { return static_cast<int>(columns.cols()); }
  GridFunction at(int i) const { return GridFunction(grid, columns.col(i)); }
  std::vector<GridFunction> functions() const;
  FunctionBatch head(int count) const;
  FunctionBatch slice(int start, int count) const;
};

/// Column-wise resample() to target_n points per axis.
FunctionBatch resample(const FunctionBatch& batch, int target_n);

/// Norms of each column under the chosen inner product.
Eigen::VectorXd column_norms(const FunctionBatch& batch, InnerProductKind kind = InnerProductKind::weighted);

}  // namespace pcanet
