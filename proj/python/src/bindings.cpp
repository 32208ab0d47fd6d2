#include "pcanet/config.hpp"
#include "pcanet/dataset.hpp"
#include "pcanet/error.hpp"
#include "pcanet/experiments.hpp"
#include "pcanet/model_io.hpp"
#include "pcanet/pca.hpp"
#include "pcanet/protocols.hpp"
#include "pcanet/surrogate.hpp"
#include "pcanet/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pcanet;

namespace {

// Functions cross the boundary as flat value arrays; a Grid travels with them.
Grid box(int n) { return {DomainKind::box2d, n}; }

GridFunction on_grid(const Grid& g, const Eigen::VectorXd& v) { return GridFunction(g, v); }

FunctionBatch batch(const Grid& g, const Eigen::MatrixXd& rows) {
  // rows: samples x points
  return FunctionBatch(g, rows.transpose());
}

Eigen::MatrixXd rows(const FunctionBatch& b) { return b.columns.transpose(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PCA-based operator learning";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());

  py::enum_<DomainKind>(m, "DomainKind").value("box2d", DomainKind::box2d).value("torus1d", DomainKind::torus1d);
  py::enum_<RegressorKind>(m, "RegressorKind").value("mlp", RegressorKind::mlp).value("linear", RegressorKind::linear);
  py::enum_<Split>(m, "Split").value("train", Split::train).value("test", Split::test);

  py::class_<Grid>(m, "Grid")
      .def(py::init([](DomainKind k, int n) {
             Grid g{k, n};
             validate(g);
             return g;
           }),
           py::arg("kind"), py::arg("n"))
      .def_readonly("kind", &Grid::kind)
      .def_readonly("n", &Grid::n)
      .def_property_readonly("size", &Grid::size)
      .def("coord", &Grid::coord)
      .def("quadrature_weights", [](const Grid& g) { return quadrature_weights(g); })
      .def("__repr__", [](const Grid& g) { return "Grid(" + std::string(to_string(g.kind)) + ", " + std::to_string(g.n) + ")"; });

  m.def("l2_norm", [](const Grid& g, const Eigen::VectorXd& v) { return norm(on_grid(g, v)); });
  m.def("resample", [](const Grid& g, const Eigen::VectorXd& v, int n) { return resample(on_grid(g, v), n).values(); },
        "Subsample or spline-interpolate values to n points per axis.");

  m.def("sample_mu_g", [](int cutoff, int n, std::uint64_t seed) { return sample_field(MeasureSpec::mu_G(cutoff), n, seed).values(); });
  m.def("sample_mu_l", [](int cutoff, int n, std::uint64_t seed) { return sample_field(MeasureSpec::mu_L(cutoff), n, seed).values(); });
  m.def("sample_mu_p", [](int cutoff, int n, std::uint64_t seed) { return sample_field(MeasureSpec::mu_P(cutoff), n, seed).values(); });
  m.def("sample_mu_b", [](int cutoff, int n, std::uint64_t seed) { return sample_field(MeasureSpec::mu_B(cutoff), n, seed).values(); });

  m.def("solve_darcy",
        [](int n, const Eigen::VectorXd& a, const Eigen::VectorXd& f, double tol) {
          return solve_darcy({on_grid(box(n), a), on_grid(box(n), f)}, {tol, 20}).values();
        },
        py::arg("n"), py::arg("a"), py::arg("f"), py::arg("tol") = 1e-10);
  m.def("solve_poisson",
        [](int n, const Eigen::VectorXd& f, double tol) { return solve_poisson(on_grid(box(n), f), {tol, 20}).values(); },
        py::arg("n"), py::arg("f"), py::arg("tol") = 1e-10);
  m.def("solve_burgers",
        [](const Eigen::VectorXd& u0, double viscosity, double t_final) {
          const Grid g{DomainKind::torus1d, static_cast<int>(u0.size())};
          return solve_burgers({on_grid(g, u0), viscosity, t_final}).values();
        },
        py::arg("u0"), py::arg("viscosity") = 1e-2, py::arg("t_final") = 1.0);

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("grid", &PcaModel::grid)
      .def_readonly("basis", &PcaModel::basis)
      .def_readonly("eigenvalues", &PcaModel::eigenvalues)
      .def_property_readonly("d", &PcaModel::dimension)
      .def("encode", [](const PcaModel& p, const Eigen::MatrixXd& x) { return encode_columns(p, x.transpose()).transpose().eval(); },
           "Codes of a samples x points array.")
      .def("decode", [](const PcaModel& p, const Eigen::MatrixXd& s) { return (p.basis * s.transpose()).transpose().eval(); })
      .def("projection_error", [](const PcaModel& p, const Eigen::MatrixXd& x) {
        return empirical_projection_error(p, batch(p.grid, x).functions());
      })
      .def("tail", [](const PcaModel& p) { return eigenvalue_tail(p); })
      .def("transfer", [](const PcaModel& p, int n) { return transfer_basis(p, n); });
  m.def("fit_pca", [](const Grid& g, const Eigen::MatrixXd& x, int d) { return fit_pca(g, x.transpose(), d); },
        py::arg("grid"), py::arg("samples"), py::arg("d"));

  py::class_<Surrogate>(m, "Surrogate")
      .def_readonly("pca_in", &Surrogate::pca_in)
      .def_readonly("pca_out", &Surrogate::pca_out)
      .def_property_readonly("regressor", [](const Surrogate& s) { return regressor_name(s.regressor); })
      .def("predict", [](const Surrogate& s, const Eigen::MatrixXd& x) { return rows(predict_functions(s, batch(s.pca_in.grid, x))); })
      .def("relative_error",
           [](const Surrogate& s, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
             return relative_test_error(s, batch(s.pca_in.grid, x), batch(s.pca_out.grid, y)).mean;
           })
      .def("transfer", [](const Surrogate& s, int n) { return transfer_surrogate(s, n); })
      .def("save", [](const Surrogate& s, const std::filesystem::path& dir) { write_surrogate(dir, s); });
  m.def("load_surrogate", &read_surrogate);

  m.def("fit_surrogate",
        [](const Grid& g_in, const Eigen::MatrixXd& x, const Grid& g_out, const Eigen::MatrixXd& y, int d,
           RegressorKind kind, std::vector<int> hidden, int epochs, int batch_size, std::uint64_t seed) {
          SurrogateFitOptions o;
          o.d_in = o.d_out = d;
          o.regressor = kind;
          o.hidden_widths = std::move(hidden);
          o.train.epochs = epochs;
          o.train.batch_size = batch_size;
          o.train.seed = seed;
          py::gil_scoped_release release;
          return fit_surrogate(batch(g_in, x), batch(g_out, y), o).surrogate;
        },
        py::arg("grid_in"), py::arg("x"), py::arg("grid_out"), py::arg("y"), py::arg("d"),
        py::arg("regressor") = RegressorKind::mlp, py::arg("hidden_widths") = default_hidden_widths(),
        py::arg("epochs") = 500, py::arg("batch_size") = 64, py::arg("seed") = 0);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("problem", [](const Dataset& d) { return std::string(to_string(d.problem)); })
      .def_property_readonly("grid", [](const Dataset& d) { return d.x.grid; })
      .def_property_readonly("x", [](const Dataset& d) { return rows(d.x); })
      .def_property_readonly("y", [](const Dataset& d) { return rows(d.y); })
      .def_property_readonly("count", &Dataset::count);
  m.def("generate_dataset",
        [](const std::string& problem, Split split, int count, const std::map<std::string, std::string>& overrides) {
          ExperimentConfig c = default_config(problem_kind_from_string(problem));
          apply_overrides(c, overrides);
          validate(c);
          py::gil_scoped_release release;
          return generate_dataset(c, split, count);
        },
        py::arg("problem"), py::arg("split"), py::arg("count"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Pairs at the finest configured resolution; overrides use config keys.");
  m.def("subsample_dataset", &subsample_dataset);
  m.def("read_dataset", &read_dataset);
  m.def("write_dataset", &write_dataset);

  py::class_<TheoryReport>(m, "TheoryReport")
      .def_readonly("name", &TheoryReport::name)
      .def_readonly("passed", &TheoryReport::passed)
      .def_readonly("statistics", &TheoryReport::statistics)
      .def_readonly("tolerances", &TheoryReport::tolerances)
      .def("__repr__", &TheoryReport::summary);
  m.def("check_fan", &check_fan, py::arg("dim"), py::arg("d"), py::arg("frames"), py::arg("matrices"), py::arg("seed"));
  m.def("check_mc_covariance_rate",
        [](int cutoff, const std::vector<int>& sizes, int trials, std::uint64_t seed) {
          return check_mc_covariance_rate(MeasureSpec::mu_G(cutoff), sizes, trials, seed);
        },
        py::arg("cutoff"), py::arg("sizes"), py::arg("trials"), py::arg("seed"));
  m.def("check_encoder_lipschitz", &check_encoder_lipschitz, py::arg("pca"), py::arg("trials"), py::arg("seed"));
  m.def("stechkin_slope", [](const std::vector<int>& truncations) {
    const ExperimentConfig c = default_config(ProblemKind::coeff_model);
    const StechkinReport r = stechkin_tail(c.measure(), c.coeff_modes, truncations);
    return py::make_tuple(r.slope, r.predicted_slope);
  });
}
