#include "pcanet/error.hpp"
#include "pcanet/surrogate.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pcanet;

namespace {

FunctionBatch mu_g_batch(int count, int n, std::uint64_t seed) {
  std::vector<GridFunction> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_gaussian_box(MeasureSpec::mu_G(8), n, derive_seed(seed, i)));
  return FunctionBatch::from_functions(out);
}

FunctionBatch poisson_batch(const FunctionBatch& f) {
  std::vector<GridFunction> out;
  for (const auto& x : f.functions()) out.push_back(solve_poisson(x));
  return FunctionBatch::from_functions(out);
}

// Exact latent matrix of the linear Poisson map between two PCA bases.
Surrogate exact_linear_surrogate(const PcaModel& in, const PcaModel& out) {
  Eigen::MatrixXd m(out.dimension(), in.dimension());
  for (int j = 0; j < in.dimension(); ++j) m.col(j) = encode(out, solve_poisson(in.basis_function(j)));
  return {in, out, LinearModel{m, Eigen::VectorXd::Zero(out.dimension())},
          Standardization::identity(in.dimension()), Standardization::identity(out.dimension())};
}

}  // namespace

TEST_CASE("composition identity on the input span") {
  const FunctionBatch x = mu_g_batch(30, 17, 1);
  const FunctionBatch y = poisson_batch(x);
  const PcaModel in = fit_pca(x.grid, x.columns, 8);
  const PcaModel out = fit_pca(y.grid, y.columns, 8);
  const Surrogate s = exact_linear_surrogate(in, out);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd c(8);
    for (auto& v : c) v = normal(rng);
    const GridFunction u = decode(in, c);
    const GridFunction expected = project(out, solve_poisson(u));
    CHECK(norm(predict_function(s, u) - expected) <= 1e-7 * norm(expected));
  }
  const GridFunction z = predict_function(s, GridFunction::zeros(in.grid));
  CHECK(z.values().cwiseAbs().maxCoeff() == 0.0);
  CHECK(predict_function(s, x.at(3)).values() == predict_function(s, x.at(3)).values());
  CHECK_THROWS_AS(predict_function(s, GridFunction::zeros({DomainKind::box2d, 9})), ShapeError);
}

TEST_CASE("relative error values") {
  const FunctionBatch y = mu_g_batch(10, 9, 3);
  CHECK(relative_error(y, y).mean == 0.0);
  const RelativeError zero = relative_error(FunctionBatch(y.grid, Eigen::MatrixXd::Zero(81, 10)), y);
  CHECK(zero.mean == 1.0);
  const FunctionBatch p = mu_g_batch(10, 9, 4);
  const double e = relative_error(p, y).mean;
  const double scaled = relative_error(FunctionBatch(y.grid, 3.7 * p.columns), FunctionBatch(y.grid, 3.7 * y.columns)).mean;
  CHECK(scaled == doctest::Approx(e).epsilon(1e-13));

  FunctionBatch with_zero = y;
  with_zero.columns.col(2).setZero();
  const RelativeError skipped = relative_error(p, with_zero);
  CHECK(skipped.skipped == 1);
  CHECK(skipped.evaluated == 9);
  CHECK_THROWS_AS(relative_error(p.head(3), y), ShapeError);
}

TEST_CASE("decoder isometry in the latent output") {
  const FunctionBatch x = mu_g_batch(20, 17, 5);
  const FunctionBatch y = poisson_batch(x);
  Surrogate s = exact_linear_surrogate(fit_pca(x.grid, x.columns, 6), fit_pca(y.grid, y.columns, 6));
  const GridFunction base = predict_function(s, x.at(0));
  Eigen::VectorXd delta(6);
  delta << 0.3, -1.0, 0.2, 0.0, 0.5, -0.1;
  std::get<LinearModel>(s.regressor).bias += delta;
  CHECK(norm(predict_function(s, x.at(0)) - base) == doctest::Approx(delta.norm()).epsilon(1e-10));
}

TEST_CASE("full-dimension linear surrogate interpolates the training set") {
  const int n_train = 12;
  const FunctionBatch x = mu_g_batch(n_train, 17, 6);
  const FunctionBatch y = poisson_batch(x);
  SurrogateFitOptions o;
  o.d_in = o.d_out = n_train;
  o.regressor = RegressorKind::linear;
  const SurrogateFit fit = fit_surrogate(x, y, o);
  CHECK(fit.history.empty());
  CHECK(relative_test_error(fit.surrogate, x, y).mean < 1e-6);
  const double psi = psi_pca_error(fit.surrogate.pca_in, fit.surrogate.pca_out,
                                   [](const GridFunction& f) { return solve_poisson(f); }, x, y).mean;
  CHECK(psi < 1e-6);
}

TEST_CASE("regressor-free error decreases with the output dimension") {
  const FunctionBatch x = mu_g_batch(40, 17, 7);
  const FunctionBatch y = poisson_batch(x);
  const PcaModel in = fit_pca(x.grid, x.columns, 10);
  const PcaModel out = fit_pca(y.grid, y.columns, 20);
  const ForwardMap forward = [](const GridFunction& f) { return solve_poisson(f); };
  double previous = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 20; d += 3) {
    const double e = psi_pca_error(in, truncate(out, d), forward, x, y).mean;
    CHECK(e >= 0.0);
    CHECK(e <= previous + 1e-12);
    previous = e;
  }
}

TEST_CASE("output and input scaling") {
  Eigen::MatrixXd z(3, 4);
  z << 1, 2, 3, 4, 10, 20, 30, 40, -1, 0, 1, 2;
  const Standardization u = Standardization::fit_uniform(z);
  CHECK(u.scale.maxCoeff() == u.scale.minCoeff());
  CHECK(u.apply(z).rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK((u.invert(u.apply(z)) - z).cwiseAbs().maxCoeff() < 1e-12);
  const Standardization zs = Standardization::fit(z);
  const Eigen::MatrixXd w = zs.apply(z);
  for (int i = 0; i < 3; ++i) CHECK(w.row(i).squaredNorm() / 4 == doctest::Approx(1.0));
  CHECK(input_scaling_from_string("uniform") == InputScaling::uniform);
  CHECK(to_string(InputScaling::zscore) == "zscore");
  CHECK_THROWS_AS(input_scaling_from_string("bogus"), ConfigError);
  CHECK(fit_scaling(InputScaling::none, z).scale == Eigen::VectorXd::Ones(3));
}

TEST_CASE("mlp surrogate fit logs validation error") {
  const FunctionBatch x = mu_g_batch(40, 9, 8);
  const FunctionBatch y = poisson_batch(x);
  SurrogateFitOptions o;
  o.d_in = o.d_out = 4;
  o.hidden_widths = {8, 8};
  o.train.epochs = 10;
  o.train.batch_size = 8;
  const FunctionBatch xv = mu_g_batch(10, 9, 9);
  const FunctionBatch yv = poisson_batch(xv);
  const SurrogateFit fit = fit_surrogate(x, y, o, &xv, &yv);
  REQUIRE(fit.history.size() == 11);
  CHECK(fit.history.back().test_metric == doctest::Approx(relative_test_error(fit.surrogate, xv, yv).mean));
  validate(fit.surrogate);
  Surrogate broken = fit.surrogate;
  broken.pca_out = truncate(broken.pca_out, 3);
  CHECK_THROWS_AS(validate(broken), ShapeError);
}

TEST_CASE("transferred surrogate runs on the new grid") {
  const FunctionBatch x = mu_g_batch(30, 17, 10);
  const FunctionBatch y = poisson_batch(x);
  const Surrogate s = exact_linear_surrogate(fit_pca(x.grid, x.columns, 6), fit_pca(y.grid, y.columns, 6));
  const Surrogate t = transfer_surrogate(s, 33);
  CHECK(t.pca_in.grid.n == 33);
  CHECK(t.pca_out.grid.n == 33);
  const GridFunction fine = resample(x.at(0), 33);
  const GridFunction a = resample(predict_function(s, x.at(0)), 33);
  const GridFunction b = predict_function(t, fine);
  CHECK(norm(a - b) < 0.05 * norm(a));
}

TEST_CASE("reduced basis recovers a solution in its span") {
  const int n = 33;
  const GridFunction a = GridFunction::from_function({DomainKind::box2d, n}, [](double s1, double s2) {
    return std::exp(0.5 * std::sin(3 * s1) * std::cos(2 * s2));
  });
  const GridFunction f = GridFunction::constant(a.grid(), 1.0);
  const GridFunction u = solve_darcy({a, f});
  const PcaModel basis = fit_pca(std::vector<GridFunction>{u}, 1);
  const GridFunction rb = rb_galerkin_solve(basis, a, f);
  CHECK(norm(rb - u) < 1e-2 * norm(u));
  const GridFunction zero = rb_galerkin_solve(basis, a, GridFunction::zeros(a.grid()));
  CHECK(zero.values().cwiseAbs().maxCoeff() == 0.0);

  const ReducedBasis r(basis);
  CHECK(r.dimension() == 1);
  CHECK(r.stiffness(a)(0, 0) > 0.0);
  CHECK_THROWS_AS(r.solve(GridFunction::zeros(a.grid()), f), Error);
}

TEST_CASE("discrete gradient is exact on quadratics") {
  const GridFunction q = GridFunction::from_function({DomainKind::box2d, 9}, [](double s1, double s2) {
    return s1 * s1 + 3 * s1 * s2 - s2;
  });
  const auto [g1, g2] = grid_gradient(q);
  const GridFunction e1 = GridFunction::from_function(q.grid(), [](double s1, double s2) { return 2 * s1 + 3 * s2; });
  const GridFunction e2 = GridFunction::from_function(q.grid(), [](double s1, double) { return 3 * s1 - 1; });
  CHECK((g1.values() - e1.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g2.values() - e2.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("taylor truncation of the Poisson map") {
  const MeasureSpec spec = MeasureSpec::coeff_model(3);
  const auto modes = ordered_coeff_modes(spec);
  const int total = static_cast<int>(modes.size());
  const int n = 33;
  const CgOptions tight{1e-12, 40};
  const TaylorPoisson full(spec, total, n, tight);
  CHECK(full.truncation() == total);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd xi(total);
  for (auto& v : xi) v = uniform(rng);
  const GridFunction truth = solve_poisson(assemble_coeff_field(modes, xi, n), tight);
  CHECK(norm(full.predict(xi) - truth) < 1e-6 * norm(truth));

  const TaylorPoisson partial(spec, 5, n, tight);
  Eigen::VectorXd tail = xi;
  tail.head(5).setZero();
  CHECK(partial.predict(tail).values().cwiseAbs().maxCoeff() == 0.0);
  const GridFunction tail_truth = solve_poisson(assemble_coeff_field(modes, tail, n), tight);
  CHECK(norm(partial.predict(xi) - truth) == doctest::Approx(norm(tail_truth)).epsilon(1e-6));
  CHECK_THROWS_AS(TaylorPoisson(spec, total + 1, n), ConfigError);
}
