#pragma once

#include "pcanet/grid.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pcanet {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Per-sample seed derived from a base seed and a sample index.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

enum class MeasureKind { mu_G, mu_L, mu_P, mu_B, coeff_model };

std::string_view to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(std::string_view name);

/// Gaussian (or push-forward / uniform-coefficient) input measure defined by a
/// covariance of the form scale * (-Laplacian + shift I)^(-exponent), expanded
/// in closed-form Laplacian eigenfunctions up to a per-axis wavenumber cutoff.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::mu_G;
  double shift = 9.0;
  double exponent = 2.0;
  double scale = 1.0;
  double threshold_high = 12.0;  ///< T(v) for v >= 0 (mu_P)
  double threshold_low = 3.0;    ///< T(v) for v < 0 (mu_P)
  int cutoff = 32;               ///< per-axis max wavenumber K

  static MeasureSpec mu_G(int cutoff);
  static MeasureSpec mu_L(int cutoff);
  static MeasureSpec mu_P(int cutoff);
  static MeasureSpec mu_B(int cutoff);
  static MeasureSpec coeff_model(int cutoff);

  /// Domain the measure lives on.
  DomainKind domain() const { return kind == MeasureKind::mu_B ? DomainKind::torus1d : DomainKind::box2d; }
};

/// Throws ConfigError on invalid spec (exponent <= 1, negative cutoff, ...).
void validate(const MeasureSpec& spec);

/// Orthonormal Neumann cosine eigenfunction on (0,1)^2 evaluated at (s1, s2).
double neumann_mode(int k1, int k2, double s1, double s2);

/// Standard deviations sigma_k of the KL coefficients for (k1, k2) in
/// {0..K}^2, stored k1-major: index k1*(K+1) + k2.
Eigen::VectorXd box_mode_std(const MeasureSpec& spec);

/// Standard deviation of the torus Fourier coefficient of wavenumber k.
double torus_mode_std(const MeasureSpec& spec, int k);

/// Draw from N(0, (-Laplacian + shift)^(-exponent)) with zero Neumann
/// boundary conditions, truncated to wavenumbers {0..K}^2.
GridFunction sample_gaussian_box(const MeasureSpec& spec, int n, std::uint64_t seed);

/// exp of a Gaussian draw.
GridFunction sample_mu_L(const MeasureSpec& spec, int n, std::uint64_t seed);

/// Piecewise-constant push-forward: high where the Gaussian draw is >= 0.
GridFunction sample_mu_P(const MeasureSpec& spec, int n, std::uint64_t seed);

double threshold_map(const MeasureSpec& spec, double v);

/// Hermitian Fourier coefficients c_k, k = -K..K (index k + K), of a real
/// torus field with E|c_k|^2 = sigma_k^2.
std::vector<std::complex<double>> sample_mu_B_spectrum(const MeasureSpec& spec, std::uint64_t seed);

/// Complex inverse transform of a spectrum indexed as above onto n torus nodes.
std::vector<std::complex<double>> synthesize_torus(const std::vector<std::complex<double>>& spectrum, int n);

/// Real periodic Gaussian draw on the torus.
GridFunction sample_mu_B(const MeasureSpec& spec, int n, std::uint64_t seed);

/// One Laplacian mode of the coefficient model, ordered by decreasing eigenvalue.
struct CoeffMode {
  int k1 = 0;
  int k2 = 0;
  double eigenvalue = 0.0;  ///< lambda_j of (-Laplacian + shift)^(-exponent)
};

/// All (K+1)^2 Neumann modes sorted by decreasing eigenvalue, ties broken
/// lexicographically on (k1, k2).
std::vector<CoeffMode> ordered_coeff_modes(const MeasureSpec& spec);

/// phi_j = sqrt(lambda_j) psi_j on the grid.
GridFunction coeff_mode_function(const CoeffMode& mode, int n);

/// Sup norm of phi_j over the continuum domain.
double coeff_mode_sup_norm(const CoeffMode& mode);

struct CoeffSample {
  Eigen::VectorXd xi;  ///< i.i.d. U(-1, 1)
  GridFunction field;  ///< sum_j xi_j sqrt(lambda_j) psi_j
};

CoeffSample sample_coeff_model(const MeasureSpec& spec, int d, int n, std::uint64_t seed);

/// Assembles sum_j xi_j phi_j for the first xi.size() ordered modes.
GridFunction assemble_coeff_field(const std::vector<CoeffMode>& modes, const Eigen::VectorXd& xi, int n);

/// Dispatches on spec.kind (coeff_model uses all (K+1)^2 modes).
GridFunction sample_field(const MeasureSpec& spec, int n, std::uint64_t seed);

}  // namespace pcanet
