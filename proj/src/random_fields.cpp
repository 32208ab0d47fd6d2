#include "pcanet/random_fields.hpp"

#include "fft.hpp"
#include "pcanet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pcanet {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::string_view to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::mu_G: return "mu_G";
    case MeasureKind::mu_L: return "mu_L";
    case MeasureKind::mu_P: return "mu_P";
    case MeasureKind::mu_B: return "mu_B";
    case MeasureKind::coeff_model: return "coeff_model";
  }
  return "unknown";
}

MeasureKind measure_kind_from_string(std::string_view name) {
  for (auto k : {MeasureKind::mu_G, MeasureKind::mu_L, MeasureKind::mu_P, MeasureKind::mu_B, MeasureKind::coeff_model}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown measure '" + std::string(name) + "'");
}

MeasureSpec MeasureSpec::mu_G(int cutoff) {
  MeasureSpec s;
  s.kind = MeasureKind::mu_G;
  s.cutoff = cutoff;
  return s;
}

MeasureSpec MeasureSpec::mu_L(int cutoff) {
  MeasureSpec s = mu_G(cutoff);
  s.kind = MeasureKind::mu_L;
  return s;
}

MeasureSpec MeasureSpec::mu_P(int cutoff) {
  MeasureSpec s = mu_G(cutoff);
  s.kind = MeasureKind::mu_P;
  return s;
}

MeasureSpec MeasureSpec::mu_B(int cutoff) {
  MeasureSpec s;
  s.kind = MeasureKind::mu_B;
  s.shift = 49.0;
  s.exponent = 2.5;
  s.scale = 2401.0;  // 7^4
  s.cutoff = cutoff;
  return s;
}

MeasureSpec MeasureSpec::coeff_model(int cutoff) {
  MeasureSpec s;
  s.kind = MeasureKind::coeff_model;
  s.shift = 100.0;
  s.exponent = 4.1;
  s.scale = 1.0;
  s.cutoff = cutoff;
  return s;
}

void validate(const MeasureSpec& spec) {
  if (!(spec.exponent > 1.0)) throw ConfigError("measure exponent must exceed 1");
  if (!(spec.shift > 0.0)) throw ConfigError("measure shift must be positive");
  if (!(spec.scale >= 0.0)) throw ConfigError("measure scale must be non-negative");
  if (spec.cutoff < 0) throw ConfigError("mode cutoff must be non-negative");
}

namespace {

void require_cutoff_fits(const MeasureSpec& spec, const Grid& grid) {
  validate(spec);
  validate(grid);
  if (spec.cutoff > grid.nyquist()) {
    throw ConfigError("mode cutoff " + std::to_string(spec.cutoff) + " exceeds the Nyquist limit " +
                      std::to_string(grid.nyquist()) + " of resolution " + std::to_string(grid.n));
  }
}

double neumann_norm_factor(int k) { return k == 0 ? 1.0 : std::numbers::sqrt2; }

// C(j, k) = c_k cos(pi k s_j): the 1-D Neumann basis on grid nodes.
Eigen::MatrixXd neumann_basis_1d(const Grid& grid, int cutoff) {
  Eigen::MatrixXd c(grid.n, cutoff + 1);
  for (int j = 0; j < grid.n; ++j) {
    const double s = grid.coord(j);
    for (int k = 0; k <= cutoff; ++k) c(j, k) = neumann_norm_factor(k) * std::cos(std::numbers::pi * k * s);
  }
  return c;
}

// Row-major grid values of sum_{k1,k2} z(k1, k2) psi_{k1}(s1) psi_{k2}(s2).
GridFunction synthesize_box(const Eigen::MatrixXd& z, int n) {
  const Grid grid{DomainKind::box2d, n};
  const Eigen::MatrixXd c = neumann_basis_1d(grid, static_cast<int>(z.rows()) - 1);
  // u(i, j) with i the s2 index: C z^T C^T.
  const Eigen::MatrixXd u = c * z.transpose() * c.transpose();
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) v[static_cast<Eigen::Index>(i) * n + j] = u(i, j);
  }
  return GridFunction(grid, std::move(v));
}

double box_eigen_std(const MeasureSpec& spec, int k1, int k2) {
  const double lap = std::numbers::pi * std::numbers::pi * (k1 * k1 + k2 * k2);
  return std::sqrt(spec.scale) * std::pow(lap + spec.shift, -0.5 * spec.exponent);
}

}  // namespace

double neumann_mode(int k1, int k2, double s1, double s2) {
  return neumann_norm_factor(k1) * neumann_norm_factor(k2) * std::cos(std::numbers::pi * k1 * s1) *
         std::cos(std::numbers::pi * k2 * s2);
}

Eigen::VectorXd box_mode_std(const MeasureSpec& spec) {
  validate(spec);
  const int m = spec.cutoff + 1;
  Eigen::VectorXd sigma(m * m);
  for (int k1 = 0; k1 < m; ++k1) {
    for (int k2 = 0; k2 < m; ++k2) sigma[k1 * m + k2] = box_eigen_std(spec, k1, k2);
  }
  return sigma;
}

double torus_mode_std(const MeasureSpec& spec, int k) {
  const double kappa = 2.0 * std::numbers::pi * k;
  return std::sqrt(spec.scale) * std::pow(kappa * kappa + spec.shift, -0.5 * spec.exponent);
}

GridFunction sample_gaussian_box(const MeasureSpec& spec, int n, std::uint64_t seed) {
  const Grid grid{DomainKind::box2d, n};
  require_cutoff_fits(spec, grid);
  const int m = spec.cutoff + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(m, m);
  for (int k1 = 0; k1 < m; ++k1) {
    for (int k2 = 0; k2 < m; ++k2) z(k1, k2) = box_eigen_std(spec, k1, k2) * normal(rng);
  }
  return synthesize_box(z, n);
}

double threshold_map(const MeasureSpec& spec, double v) {
  return v >= 0.0 ? spec.threshold_high : spec.threshold_low;
}

GridFunction sample_mu_L(const MeasureSpec& spec, int n, std::uint64_t seed) {
  const GridFunction g = sample_gaussian_box(spec, n, seed);
  return GridFunction(g.grid(), g.values().array().exp().matrix());
}

GridFunction sample_mu_P(const MeasureSpec& spec, int n, std::uint64_t seed) {
  const GridFunction g = sample_gaussian_box(spec, n, seed);
  return GridFunction(g.grid(), g.values().unaryExpr([&](double v) { return threshold_map(spec, v); }));
}

std::vector<std::complex<double>> sample_mu_B_spectrum(const MeasureSpec& spec, std::uint64_t seed) {
  validate(spec);
  const int kmax = spec.cutoff;
  std::vector<std::complex<double>> c(static_cast<std::size_t>(2 * kmax + 1));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  c[static_cast<std::size_t>(kmax)] = torus_mode_std(spec, 0) * normal(rng);
  for (int k = 1; k <= kmax; ++k) {
    const double a = normal(rng);
    const double b = normal(rng);
    const std::complex<double> ck = torus_mode_std(spec, k) * std::complex<double>(a, b) / std::numbers::sqrt2;
    c[static_cast<std::size_t>(kmax + k)] = ck;
    c[static_cast<std::size_t>(kmax - k)] = std::conj(ck);
  }
  return c;
}

std::vector<std::complex<double>> synthesize_torus(const std::vector<std::complex<double>>& spectrum, int n) {
  const int kmax = static_cast<int>(spectrum.size() / 2);
  require_cutoff_fits(MeasureSpec::mu_B(kmax), Grid{DomainKind::torus1d, n});
  std::vector<std::complex<double>> data(static_cast<std::size_t>(n), 0.0);
  for (int k = -kmax; k <= kmax; ++k) {
    data[static_cast<std::size_t>((k + n) % n)] = spectrum[static_cast<std::size_t>(k + kmax)];
  }
  const detail::ComplexFft inverse(n, FFTW_BACKWARD);
  inverse.run(data);
  return data;
}

GridFunction sample_mu_B(const MeasureSpec& spec, int n, std::uint64_t seed) {
  const Grid grid{DomainKind::torus1d, n};
  require_cutoff_fits(spec, grid);
  const std::vector<std::complex<double>> values = synthesize_torus(sample_mu_B_spectrum(spec, seed), n);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = values[static_cast<std::size_t>(i)].real();
  return GridFunction(grid, std::move(v));
}

std::vector<CoeffMode> ordered_coeff_modes(const MeasureSpec& spec) {
  validate(spec);
  const int m = spec.cutoff + 1;
  std::vector<CoeffMode> modes;
  modes.reserve(static_cast<std::size_t>(m) * m);
  for (int k1 = 0; k1 < m; ++k1) {
    for (int k2 = 0; k2 < m; ++k2) {
      const double s = box_eigen_std(spec, k1, k2);
      modes.push_back({k1, k2, s * s});
    }
  }
  std::stable_sort(modes.begin(), modes.end(), [](const CoeffMode& a, const CoeffMode& b) {
    if (a.eigenvalue != b.eigenvalue) return a.eigenvalue > b.eigenvalue;
    return std::pair(a.k1, a.k2) < std::pair(b.k1, b.k2);
  });
  return modes;
}

GridFunction coeff_mode_function(const CoeffMode& mode, int n) {
  const double amp = std::sqrt(mode.eigenvalue);
  return GridFunction::from_function(Grid{DomainKind::box2d, n}, [&](double s1, double s2) {
    return amp * neumann_mode(mode.k1, mode.k2, s1, s2);
  });
}

double coeff_mode_sup_norm(const CoeffMode& mode) {
  return std::sqrt(mode.eigenvalue) * neumann_norm_factor(mode.k1) * neumann_norm_factor(mode.k2);
}

GridFunction assemble_coeff_field(const std::vector<CoeffMode>& modes, const Eigen::VectorXd& xi, int n) {
  if (static_cast<std::size_t>(xi.size()) > modes.size()) {
    throw ConfigError("requested " + std::to_string(xi.size()) + " coefficients but only " +
                      std::to_string(modes.size()) + " modes are available");
  }
  int cutoff = 0;
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    cutoff = std::max({cutoff, modes[static_cast<std::size_t>(j)].k1, modes[static_cast<std::size_t>(j)].k2});
  }
  if (cutoff > n - 1) throw ConfigError("coefficient modes exceed the Nyquist limit of resolution " + std::to_string(n));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    const CoeffMode& m = modes[static_cast<std::size_t>(j)];
    z(m.k1, m.k2) = xi[j] * std::sqrt(m.eigenvalue);
  }
  return synthesize_box(z, n);
}

CoeffSample sample_coeff_model(const MeasureSpec& spec, int d, int n, std::uint64_t seed) {
  const std::vector<CoeffMode> modes = ordered_coeff_modes(spec);
  if (d < 0 || static_cast<std::size_t>(d) > modes.size()) {
    throw ConfigError("coefficient count " + std::to_string(d) + " exceeds the " + std::to_string(modes.size()) +
                      " available modes");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd xi(d);
  for (int j = 0; j < d; ++j) xi[j] = uniform(rng);
  GridFunction field = assemble_coeff_field(modes, xi, n);
  return {std::move(xi), std::move(field)};
}

GridFunction sample_field(const MeasureSpec& spec, int n, std::uint64_t seed) {
  switch (spec.kind) {
    case MeasureKind::mu_G: return sample_gaussian_box(spec, n, seed);
    case MeasureKind::mu_L: return sample_mu_L(spec, n, seed);
    case MeasureKind::mu_P: return sample_mu_P(spec, n, seed);
    case MeasureKind::mu_B: return sample_mu_B(spec, n, seed);
    case MeasureKind::coeff_model: {
      const int m = spec.cutoff + 1;
      return sample_coeff_model(spec, m * m, n, seed).field;
    }
  }
  throw ConfigError("unknown measure kind");
}

}  // namespace pcanet
