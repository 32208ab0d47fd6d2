#pragma once

#include "pcanet/grid.hpp"

#include <vector>

namespace pcanet {

/// -div(a grad u) = f on the unit square, u = 0 on the boundary.
struct EllipticProblem {
  GridFunction a;
  GridFunction f;
};

struct CgOptions {
  double relative_tolerance = 1e-10;
  /// Iteration cap as a multiple of the resolution.
  int max_iterations_per_n = 20;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Second-order conservative five-point scheme with harmonic-mean face
/// coefficients, solved by Jacobi-preconditioned conjugate gradients.
GridFunction solve_darcy(const EllipticProblem& problem, const CgOptions& options = {},
                         CgReport* report = nullptr);

/// solve_darcy with a = 1.
GridFunction solve_poisson(const GridFunction& f, const CgOptions& options = {}, CgReport* report = nullptr);

/// u_t + (u^2/2)_s = beta u_ss on the unit torus.
struct BurgersProblem {
  GridFunction u0;
  double viscosity = 1e-2;
  double t_final = 1.0;
};

struct BurgersOptions {
  double cfl_safety = 0.5;
};

/// Fourier pseudo-spectral solve with 2/3-rule dealiasing and integrating
/// factor RK4; returns u(., t_final).
GridFunction solve_burgers(const BurgersProblem& problem, const BurgersOptions& options = {});

/// Snapshots of the same integration at the given increasing times
/// (each <= t_final; the step size is shared with solve_burgers).
std::vector<GridFunction> solve_burgers_snapshots(const BurgersProblem& problem, const std::vector<double>& times,
                                                  const BurgersOptions& options = {});

/// Exact solution through the Cole-Hopf transform, evaluated spectrally.
/// Validation oracle only; requires mean-zero initial data.
GridFunction oracle_burgers_colehopf(const BurgersProblem& problem);

}  // namespace pcanet
