#include "pcanet/pde.hpp"

#include "fft.hpp"
#include "pcanet/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace pcanet {

namespace {

// Matrix-free h^2-scaled five-point operator on interior nodes.
class DarcyOperator {
 public:
  explicit DarcyOperator(const GridFunction& a) : n_(a.resolution()), m_(n_ - 2) {
    const auto harmonic = [](double x, double y) { return 2.0 * x * y / (x + y); };
    // east(i, j): face between interior unknown (i, j) and (i, j+1), in grid
    // indices shifted by one; likewise north along s2.
    east_.resize(static_cast<std::size_t>(m_) * (m_ + 1));
    north_.resize(static_cast<std::size_t>(m_ + 1) * m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j <= m_; ++j) east_[idx_e(i, j)] = harmonic(a.at(i + 1, j), a.at(i + 1, j + 1));
    }
    for (int i = 0; i <= m_; ++i) {
      for (int j = 0; j < m_; ++j) north_[idx_n(i, j)] = harmonic(a.at(i, j + 1), a.at(i + 1, j + 1));
    }
    diag_.resize(static_cast<Eigen::Index>(m_) * m_);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) {
        diag_[i * m_ + j] = east_[idx_e(i, j)] + east_[idx_e(i, j + 1)] + north_[idx_n(i, j)] + north_[idx_n(i + 1, j)];
      }
    }
  }

  int unknowns_per_axis() const { return m_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }

  void apply(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    out.resize(u.size());
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) {
        const Eigen::Index k = static_cast<Eigen::Index>(i) * m_ + j;
        double acc = diag_[k] * u[k];
        if (j > 0) acc -= east_[idx_e(i, j)] * u[k - 1];
        if (j < m_ - 1) acc -= east_[idx_e(i, j + 1)] * u[k + 1];
        if (i > 0) acc -= north_[idx_n(i, j)] * u[k - m_];
        if (i < m_ - 1) acc -= north_[idx_n(i + 1, j)] * u[k + m_];
        out[k] = acc;
      }
    }
  }

 private:
  std::size_t idx_e(int i, int j) const { return static_cast<std::size_t>(i) * (m_ + 1) + j; }
  std::size_t idx_n(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }

  int n_;
  int m_;
  std::vector<double> east_;
  std::vector<double> north_;
  Eigen::VectorXd diag_;
};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

GridFunction solve_darcy(const EllipticProblem& problem, const CgOptions& options, CgReport* report) {
  const GridFunction& a = problem.a;
  const GridFunction& f = problem.f;
  if (a.kind() != DomainKind::box2d) throw ShapeError("Darcy problems live on the box domain");
  if (a.grid() != f.grid()) throw ShapeError("coefficient and forcing grids differ");
  const int n = a.resolution();
  if (n < 3) throw ShapeError("Darcy solve needs resolution >= 3");
  if (!(a.values().minCoeff() > 0.0)) throw DomainError("Darcy coefficient must be positive at every node");

  const DarcyOperator op(a);
  const int m = op.unknowns_per_axis();
  const double h2 = 1.0 / ((n - 1.0) * (n - 1.0));
  Eigen::VectorXd b(static_cast<Eigen::Index>(m) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) b[static_cast<Eigen::Index>(i) * m + j] = h2 * f.at(i + 1, j + 1);
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const double b_norm = b.norm();
  CgReport local;
  if (b_norm > 0.0) {
    const Eigen::VectorXd inv_diag = op.diagonal().cwiseInverse();
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q;
    double rz = r.dot(z);
    const int cap = options.max_iterations_per_n * n;
    const double target = options.relative_tolerance * b_norm;
    double r_norm = b_norm;
    int it = 0;
    while (r_norm > target && it < cap) {
      op.apply(p, q);
      const double alpha = rz / p.dot(q);
      x.noalias() += alpha * p;
      r.noalias() -= alpha * q;
      r_norm = r.norm();
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
      ++it;
    }
    local = {it, r_norm / b_norm};
    if (!(r_norm <= target)) {
      throw NumericalError("conjugate gradients stopped after " + std::to_string(it) +
                           " iterations with relative residual " + std::to_string(r_norm / b_norm));
    }
  }
  if (report) *report = local;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      u[static_cast<Eigen::Index>(i + 1) * n + (j + 1)] = x[static_cast<Eigen::Index>(i) * m + j];
    }
  }
  return GridFunction(a.grid(), std::move(u));
}

GridFunction solve_poisson(const GridFunction& f, const CgOptions& options, CgReport* report) {
  return solve_darcy({GridFunction::constant(f.grid(), 1.0), f}, options, report);
}

namespace {

void validate_burgers(const BurgersProblem& p) {
  if (p.u0.kind() != DomainKind::torus1d) throw ShapeError("Burgers initial data must live on the torus");
  if (!is_power_of_two(p.u0.resolution())) throw ShapeError("Burgers resolution must be a power of two");
  if (!(p.viscosity > 0.0)) throw DomainError("viscosity must be positive");
  if (!(p.t_final > 0.0)) throw DomainError("final time must be positive");
}

class BurgersStepper {
 public:
  BurgersStepper(int n, double viscosity) : fft_(n), n_(n), viscosity_(viscosity) {
    const int bins = n / 2 + 1;
    kappa_.resize(static_cast<std::size_t>(bins));
    keep_.resize(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
      kappa_[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k;
      keep_[static_cast<std::size_t>(k)] = 3 * k <= n ? 1.0 : 0.0;  // 2/3 rule
    }
  }

  // -(i kappa / 2) FFT(u^2), dealiased.
  void nonlinear(const std::vector<std::complex<double>>& uh, std::vector<std::complex<double>>& out) {
    masked_ = uh;
    for (std::size_t k = 0; k < masked_.size(); ++k) masked_[k] *= keep_[k];
    fft_.inverse(masked_, real_);
    for (double& v : real_) {
      if (!std::isfinite(v)) throw NumericalError("Burgers solution became non-finite");
      v *= v;
    }
    fft_.forward(real_, out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] *= std::complex<double>(0.0, -0.5 * kappa_[k]) * keep_[k];
    }
  }

  void step(std::vector<std::complex<double>>& uh, double dt) {
    const std::size_t bins = uh.size();
    e_half_.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) e_half_[k] = std::exp(-viscosity_ * kappa_[k] * kappa_[k] * 0.5 * dt);
    tmp_.resize(bins);
    nonlinear(uh, ka_);
    for (std::size_t k = 0; k < bins; ++k) tmp_[k] = e_half_[k] * (uh[k] + 0.5 * dt * ka_[k]);
    nonlinear(tmp_, kb_);
    for (std::size_t k = 0; k < bins; ++k) tmp_[k] = e_half_[k] * uh[k] + 0.5 * dt * kb_[k];
    nonlinear(tmp_, kc_);
    for (std::size_t k = 0; k < bins; ++k) tmp_[k] = e_half_[k] * e_half_[k] * uh[k] + e_half_[k] * dt * kc_[k];
    nonlinear(tmp_, kd_);
    for (std::size_t k = 0; k < bins; ++k) {
      const double e = e_half_[k];
      uh[k] = e * e * uh[k] + dt * (e * e * ka_[k] + 2.0 * e * (kb_[k] + kc_[k]) + kd_[k]) / 6.0;
    }
  }

  detail::RealFft& fft() { return fft_; }
  int size() const { return n_; }

 private:
  detail::RealFft fft_;
  int n_;
  double viscosity_;
  std::vector<double> kappa_, keep_, real_;
  std::vector<std::complex<double>> masked_, tmp_, ka_, kb_, kc_, kd_;
  std::vector<double> e_half_;
};

}  // namespace

std::vector<GridFunction> solve_burgers_snapshots(const BurgersProblem& problem, const std::vector<double>& times,
                                                  const BurgersOptions& options) {
  validate_burgers(problem);
  const int n = problem.u0.resolution();
  const double max_u0 = problem.u0.values().cwiseAbs().maxCoeff();
  const double dx = 1.0 / n;
  const double dt_cfl = max_u0 > 0.0 ? options.cfl_safety * dx / max_u0 : problem.t_final;

  BurgersStepper stepper(n, problem.viscosity);
  std::vector<double> u(problem.u0.values().data(), problem.u0.values().data() + n);
  std::vector<std::complex<double>> uh;
  stepper.fft().forward(u, uh);

  std::vector<GridFunction> out;
  double t = 0.0;
  for (double target : times) {
    if (target < t || target > problem.t_final) throw ConfigError("snapshot times must increase within [0, t_final]");
    const double span = target - t;
    const int steps = span > 0.0 ? std::max(1, static_cast<int>(std::ceil(span / dt_cfl - 1e-12))) : 0;
    for (int s = 0; s < steps; ++s) stepper.step(uh, span / steps);
    t = target;
    stepper.fft().inverse(uh, u);
    Eigen::Map<const Eigen::VectorXd> values(u.data(), n);
    if (!values.allFinite() || values.cwiseAbs().maxCoeff() > 1e3 * (1.0 + max_u0)) {
      throw NumericalError("Burgers integration blew up before t = " + std::to_string(target));
    }
    out.emplace_back(problem.u0.grid(), values);
  }
  return out;
}

GridFunction solve_burgers(const BurgersProblem& problem, const BurgersOptions& options) {
  return solve_burgers_snapshots(problem, {problem.t_final}, options).back();
}

GridFunction oracle_burgers_colehopf(const BurgersProblem& problem) {
  validate_burgers(problem);
  const int n = problem.u0.resolution();
  const double beta = problem.viscosity;
  const Eigen::VectorXd& u0 = problem.u0.values();
  if (std::abs(u0.mean()) > 1e-12 * std::max(1.0, u0.cwiseAbs().maxCoeff())) {
    throw DomainError("Cole-Hopf oracle requires mean-zero initial data");
  }
  const detail::RealFft fft(n);
  std::vector<double> real(u0.data(), u0.data() + n);
  std::vector<std::complex<double>> spec;
  fft.forward(real, spec);
  const int bins = n / 2 + 1;
  const auto kappa = [](int k) { return 2.0 * std::numbers::pi * k; };

  // Primitive of u0 (mean-zero, so periodic).
  std::vector<std::complex<double>> prim(static_cast<std::size_t>(bins), 0.0);
  for (int k = 1; k < bins; ++k) {
    if (2 * k == n) continue;
    prim[static_cast<std::size_t>(k)] = spec[static_cast<std::size_t>(k)] / std::complex<double>(0.0, kappa(k));
  }
  fft.inverse(prim, real);
  double top = -INFINITY;
  for (double& v : real) {
    v = -v / (2.0 * beta);
    top = std::max(top, v);
  }
  for (double& v : real) v = std::exp(v - top);

  std::vector<std::complex<double>> theta;
  fft.forward(real, theta);
  std::vector<std::complex<double>> dtheta(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    const double kap = kappa(k);
    theta[static_cast<std::size_t>(k)] *= std::exp(-beta * kap * kap * problem.t_final);
    dtheta[static_cast<std::size_t>(k)] =
        2 * k == n ? 0.0 : std::complex<double>(0.0, kap) * theta[static_cast<std::size_t>(k)];
  }
  std::vector<double> th, dth;
  fft.inverse(theta, th);
  fft.inverse(dtheta, dth);
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = -2.0 * beta * dth[static_cast<std::size_t>(i)] / th[static_cast<std::size_t>(i)];
  return GridFunction(problem.u0.grid(), std::move(u));
}

}  // namespace pcanet
