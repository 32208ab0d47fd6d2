#include "pcanet/error.hpp"
#include "pcanet/pde.hpp"
#include "pcanet/random_fields.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pcanet;
using std::numbers::pi;

namespace {

double manufactured_error(int n) {
  const Grid g{DomainKind::box2d, n};
  const auto f = GridFunction::from_function(g, [](double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
  const auto exact = GridFunction::from_function(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
  return (solve_poisson(f).values() - exact.values()).cwiseAbs().maxCoeff();
}

// Double sine series of the unit-square Poisson problem with f = 1.
double poisson_series(double x, double y, int terms) {
  double u = 0.0;
  for (int m = 1; m <= terms; m += 2) {
    for (int k = 1; k <= terms; k += 2) {
      u += 16.0 / (std::pow(pi, 4) * m * k * (m * m + k * k)) * std::sin(m * pi * x) * std::sin(k * pi * y);
    }
  }
  return u;
}

GridFunction torus(int n, double (*f)(double)) {
  return GridFunction::from_function({DomainKind::torus1d, n}, [f](double s, double) { return f(s); });
}

double rel_l2(const GridFunction& a, const GridFunction& b) { return norm(a - b) / norm(b); }

}  // namespace

TEST_CASE("Darcy manufactured solution converges at second order") {
  const double e17 = manufactured_error(17), e33 = manufactured_error(33), e65 = manufactured_error(65);
  const double order1 = std::log2(e17 / e33), order2 = std::log2(e33 / e65);
  CHECK(order1 >= 1.8);
  CHECK(order1 <= 2.2);
  CHECK(order2 >= 1.8);
  CHECK(order2 <= 2.2);
}

TEST_CASE("Poisson with unit forcing matches the Fourier series at the centre") {
  const double oracle = poisson_series(0.5, 0.5, 401);
  CHECK(oracle == doctest::Approx(0.07367).epsilon(1e-4));
  const auto u = solve_poisson(GridFunction::constant({DomainKind::box2d, 129}, 1.0));
  CHECK(std::abs(u.at(64, 64) - oracle) < 1e-3);
}

TEST_CASE("zero forcing gives zero") {
  const Grid g{DomainKind::box2d, 17};
  const auto a = sample_mu_L(MeasureSpec::mu_L(16), 17, 2);
  CHECK(solve_darcy({a, GridFunction::zeros(g)}).values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Poisson solve is linear") {
  const auto f1 = sample_gaussian_box(MeasureSpec::mu_G(32), 33, 1);
  const auto f2 = sample_gaussian_box(MeasureSpec::mu_G(32), 33, 2);
  const double alpha = 2.5;
  const auto lhs = solve_poisson(alpha * f1 + f2);
  const auto rhs = alpha * solve_poisson(f1) + solve_poisson(f2);
  CHECK(norm(lhs - rhs) / norm(lhs) < 1e-8);
}

TEST_CASE("Darcy errors") {
  const Grid g{DomainKind::box2d, 9};
  auto a = GridFunction::constant(g, 1.0);
  Eigen::VectorXd bad = a.values();
  bad[40] = 0.0;
  CHECK_THROWS_AS(solve_darcy({GridFunction(g, bad), a}), DomainError);
  CHECK_THROWS_AS(solve_darcy({a, GridFunction::constant({DomainKind::box2d, 5}, 1.0)}), ShapeError);
  CgOptions tight;
  tight.max_iterations_per_n = 0;
  CHECK_THROWS_AS(solve_poisson(GridFunction::constant({DomainKind::box2d, 33}, 1.0), tight), NumericalError);
}

TEST_CASE("CG report") {
  CgReport report;
  solve_darcy({sample_mu_P(MeasureSpec::mu_P(32), 33, 4), GridFunction::constant({DomainKind::box2d, 33}, 1.0)}, {},
              &report);
  CHECK(report.iterations > 0);
  CHECK(report.iterations <= 20 * 33);
  CHECK(report.relative_residual <= 1e-10);
}

TEST_CASE("discrete maximum principle and symmetry") {
  const Grid g{DomainKind::box2d, 33};
  const auto a = sample_mu_P(MeasureSpec::mu_P(32), 33, 7);
  const auto f = GridFunction::from_function(g, [](double x, double y) { return 1.0 + x * y; });
  CHECK(solve_darcy({a, f}).values().minCoeff() >= -1e-12);

  // a and f symmetric under (s1, s2) -> (s2, s1)
  Eigen::VectorXd av(g.size());
  for (int i = 0; i < 33; ++i) {
    for (int j = 0; j < 33; ++j) av[i * 33 + j] = std::max(a.at(i, j), a.at(j, i));
  }
  const auto sym_a = GridFunction(g, av);
  const auto sym_f = GridFunction::from_function(g, [](double x, double y) { return std::exp(x + y); });
  const auto u = solve_darcy({sym_a, sym_f});
  double asym = 0.0;
  for (int i = 0; i < 33; ++i) {
    for (int j = 0; j < 33; ++j) asym = std::max(asym, std::abs(u.at(i, j) - u.at(j, i)));
  }
  CHECK(asym < 1e-8 * u.values().cwiseAbs().maxCoeff());
}

TEST_CASE("Burgers basics") {
  const auto zero = GridFunction::zeros({DomainKind::torus1d, 256});
  CHECK(solve_burgers({zero, 0.01, 1.0}).values().cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(solve_burgers({GridFunction::zeros({DomainKind::torus1d, 100}), 0.01, 1.0}), ShapeError);
  CHECK_THROWS_AS(solve_burgers({zero, 0.0, 1.0}), DomainError);
}

TEST_CASE("Burgers conserves the mean") {
  const auto u0 = torus(512, [](double s) { return 0.3 + std::sin(2 * pi * s) + 0.5 * std::cos(6 * pi * s); });
  const auto u = solve_burgers({u0, 0.01, 1.0});
  CHECK(std::abs(u.values().mean() - u0.values().mean()) < 1e-12);
}

TEST_CASE("Burgers matches the Cole-Hopf oracle") {
  const auto u0 = torus(1024, [](double s) { return std::sin(2 * pi * s); });
  const BurgersProblem p{u0, 0.05, 0.5};
  CHECK(rel_l2(solve_burgers(p), oracle_burgers_colehopf(p)) < 1e-6);

  const auto random0 = sample_mu_B(MeasureSpec::mu_B(100), 1024, 3);
  const Eigen::VectorXd centred = random0.values().array() - random0.values().mean();
  const BurgersProblem q{GridFunction(random0.grid(), centred), 0.05, 0.5};
  CHECK(rel_l2(solve_burgers(q), oracle_burgers_colehopf(q)) < 1e-6);
}

TEST_CASE("Cole-Hopf oracle") {
  SUBCASE("large viscosity and small amplitude follow the heat equation") {
    const double eps = 1e-3, beta = 1.0, t = 0.05;
    const auto u0 = GridFunction::from_function({DomainKind::torus1d, 256}, [&](double s, double) { return eps * std::sin(2 * pi * s); });
    const auto heat = std::exp(-beta * 4 * pi * pi * t) * u0;
    CHECK(rel_l2(oracle_burgers_colehopf({u0, beta, t}), heat) < 1e-2);
  }
  SUBCASE("zero stays zero") {
    const auto z = GridFunction::zeros({DomainKind::torus1d, 128});
    CHECK(oracle_burgers_colehopf({z, 0.1, 1.0}).values().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("non mean-zero data is rejected") {
    const auto u0 = torus(128, [](double s) { return 1.0 + std::sin(2 * pi * s); });
    CHECK_THROWS_AS(oracle_burgers_colehopf({u0, 0.1, 1.0}), DomainError);
  }
}

TEST_CASE("Burgers energy does not increase for mean-zero data") {
  const auto u0 = torus(512, [](double s) { return std::sin(2 * pi * s) - 0.7 * std::sin(4 * pi * s); });
  const auto snaps = solve_burgers_snapshots({u0, 0.01, 1.0}, {0.1, 0.2, 0.4, 0.6, 0.8, 1.0});
  double previous = norm(u0);
  for (const auto& s : snaps) {
    CHECK(norm(s) <= previous + 1e-12);
    previous = norm(s);
  }
}
