#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "whitney/harness.hpp"

namespace py = pybind11;
using namespace whitney;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

// Reports cross the boundary as JSON text; the package turns them into dicts.
template <class T>
std::string dump(const T& r) {
  return to_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_whitney, m) {
  m.doc() = "Linear extension operator for L^{2,p} on the fractal set E";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", error.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());

  py::class_<FractalSet>(m, "FractalSet")
      .def(py::init([](std::int64_t n, int l, std::int64_t min_inv_eps) {
             return FractalSet(FractalParams{n, l, min_inv_eps});
           }),
           py::arg("N"), py::arg("L"), py::arg("min_inv_eps") = 8)
      .def("__len__", &FractalSet::size)
      .def_property_readonly("denom", &FractalSet::denom)
      .def_property_readonly("delta", &FractalSet::delta_value)
      .def_property_readonly("e2_size", &FractalSet::e2_size)
      .def("points",
           [](const FractalSet& s) {
             py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{2}});
             auto v = out.mutable_unchecked<2>();
             for (std::size_t i = 0; i < s.size(); ++i) {
               const Vec2 x = s.point(i);
               v(i, 0) = x.x();
               v(i, 1) = x.y();
             }
             return out;
           })
      .def("separation", [](const FractalSet& s) { return dump(validate_separation(s)); });

  py::class_<CzDecomposition, std::shared_ptr<CzDecomposition>>(m, "CzDecomposition")
      .def(py::init<const FractalSet&>(), py::arg("set"))
      .def("__len__", &CzDecomposition::size)
      .def_property_readonly("set", &CzDecomposition::set, py::return_value_policy::reference_internal)
      .def("geometry", [](const CzDecomposition& d) { return dump(verify_good_geometry(d)); })
      .def("pou", [](const CzDecomposition& d, std::size_t max_squares) {
        return dump(verify_pou(d, PouSampling{0, max_squares}));
      }, py::arg("max_squares") = 20000);

  py::class_<TreeSolution>(m, "TreeSolution")
      .def_readonly("values", &TreeSolution::values)
      .def_readonly("objective", &TreeSolution::objective)
      .def_readonly("kkt_residual", &TreeSolution::kkt_residual)
      .def_readonly("iterations", &TreeSolution::iterations);

  m.def("level_weights", [](std::int64_t n, int l, double p) {
    return level_weights(FractalParams{n, l, 4}, p);
  }, py::arg("N"), py::arg("L"), py::arg("p"));
  m.def("minimize_tree", [](int depth, double p, std::vector<double> weights, std::vector<double> leaves, double tol) {
    return minimize_tree(TreeProblem{depth, p, std::move(weights), std::move(leaves)}, TreeSolverOptions{tol, 500});
  }, py::arg("depth"), py::arg("p"), py::arg("weights"), py::arg("leaves"), py::arg("tol") = 1e-10);

  py::class_<Extension, std::shared_ptr<Extension>>(m, "Extension")
      .def("evaluate",
           [](const Extension& e, double x, double y) {
             const Jet j = e.evaluate(Vec2(x, y));
             return py::make_tuple(j.value, Eigen::Vector2d(j.gradient), Eigen::Matrix2d(j.hessian));
           },
           py::arg("x"), py::arg("y"))
      .def("values",
           [](const Extension& e, const py::array_t<double, py::array::c_style | py::array::forcecast>& xy) {
             if (xy.ndim() != 2 || xy.shape(1) != 2) throw ConfigError("expected an (n, 2) array");
             py::array_t<double> out(std::vector<py::ssize_t>{xy.shape(0)});
             auto in = xy.unchecked<2>();
             auto o = out.mutable_unchecked<1>();
             for (py::ssize_t k = 0; k < xy.shape(0); ++k) o(k) = e.evaluate(Vec2(in(k, 0), in(k, 1)), 0).value;
             return out;
           })
      .def("seminorm", [](const Extension& e, double p, int subcells, int nodes) {
        return seminorm(e, p, QuadratureConfig{subcells, nodes, 0.01, false}).value;
      }, py::arg("p"), py::arg("subcells") = 2, py::arg("nodes") = 5)
      .def("interpolation_error", [](const Extension& e, const py::array_t<double>& f) {
        return interpolation_error(e, to_vector(f));
      })
      .def("tail", [](const Extension& e) {
        const AffinePolynomial& t = e.tail();
        return py::make_tuple(t.a0, t.a1, t.a2);
      });

  m.def("extend",
        [](const py::array_t<double>& f, std::shared_ptr<CzDecomposition> d, double p) {
          const PipelineResult r = extend(to_vector(f), d, PipelineConfig{p});
          return std::make_shared<Extension>(*r.extension);
        },
        py::arg("f"), py::arg("decomposition"), py::arg("p") = 1.5);

  m.def("minimal_grid_energy",
        [](const FractalSet& s, const py::array_t<double>& f, double p, int refine) {
          OracleOptions opt;
          opt.refine = refine;
          const OracleResult r = grid_minimal_extension(s, to_vector(f), p, opt);
          return py::make_tuple(r.objective, Eigen::VectorXd(r.grid.values));
        },
        py::arg("set"), py::arg("f"), py::arg("p"), py::arg("refine") = 1);

  m.def("bump_data", [](const FractalSet& s, std::uint64_t seed, double p) {
    AnalyticTestFunction g;
    auto f = make_data(DataKind::bump, s, seed, {}, &g);
    return py::make_tuple(f, g.seminorm(p));
  }, py::arg("set"), py::arg("seed"), py::arg("p") = 1.5);

  m.def("verify", [](const std::string& config) {
    return dump(run_verification_suite(verification_config_from_json(Json::parse(config))));
  }, py::arg("config") = "{}");
}
