#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>

#include "mcfs/error.hpp"
#include "mcfs/io.hpp"
#include "mcfs/linflow.hpp"
#include "mcfs/model.hpp"
#include "mcfs/orbits.hpp"
#include "mcfs/signature.hpp"
#include "mcfs/spectra.hpp"

namespace py = pybind11;
using namespace mcfs;

namespace {

py::dict bounds_dict(const signature::LyapunovBounds& b) {
  py::dict d;
  d["n_min"] = b.n_min;
  d["n_max"] = b.n_max;
  d["exact"] = b.exact;
  return d;
}

// Reports go through the same JSON serializer as the CLI.
py::object as_python(const io::Json& j) {
  return py::module_::import("json").attr("loads")(io::dump(j, -1));
}

signature::ConeSide side_of(const std::string& s) {
  if (s == "lower") return signature::ConeSide::lower;
  if (s == "upper") return signature::ConeSide::upper;
  throw Error(ErrorCode::invalid_input, "side must be 'lower' or 'upper'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monotone cyclic feedback systems";
#ifdef VERSION_INFO
#define MCFS_STR(x) #x
#define MCFS_XSTR(x) MCFS_STR(x)
  m.attr("__version__") = MCFS_XSTR(VERSION_INFO);
#endif

  static py::exception<Error> error_type(m, "McfsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // signature
  m.def("count_N", [](const Vector& x) { return signature::count_N(x); }, py::arg("x"));
  m.def("bounds_N", [](const Vector& x) { return bounds_dict(signature::bounds_N(x)); }, py::arg("x"));
  m.def("in_cone", [](const Vector& x, int h, const std::string& side) { return signature::in_cone(x, h, side_of(side)); },
        py::arg("x"), py::arg("h"), py::arg("side") = "lower");
  m.def("predict_crossing", [](const Matrix& a, const Vector& x) {
    const auto p = signature::predict_crossing(a, x);
    py::dict d;
    d["signs_plus"] = p.signs_plus;
    d["signs_minus"] = p.signs_minus;
    d["N_plus"] = p.N_plus;
    d["N_minus"] = p.N_minus;
    return d;
  }, py::arg("a0"), py::arg("x0"));

  // model
  py::class_<model::CyclicSystem>(m, "CyclicSystem")
      .def_property_readonly("dimension", &model::CyclicSystem::dimension)
      .def_property_readonly("delta", &model::CyclicSystem::delta)
      .def_property_readonly("label", &model::CyclicSystem::label)
      .def("f", &model::CyclicSystem::f)
      .def("jacobian", &model::CyclicSystem::jacobian);
  m.def("goodwin", &model::goodwin, py::arg("n"), py::arg("p"), py::arg("b"));
  m.def("linear_ring", &model::linear_ring, py::arg("a"));
  m.def("model_from_json", [](const std::string& text) { return model::from_json(nlohmann::json::parse(text)); });
  m.def("validate_feedback", [](const model::CyclicSystem& sys, const Vector& lo, const Vector& hi, std::size_t samples,
                                std::uint64_t seed) {
    const auto r = model::validate_feedback(sys, {lo, hi}, samples, seed);
    py::dict d;
    d["ok"] = r.ok;
    d["samples_checked"] = r.samples_checked;
    d["violations"] = r.violations.size();
    return d;
  }, py::arg("system"), py::arg("lower"), py::arg("upper"), py::arg("samples") = 1000, py::arg("seed") = 0);

  // linflow
  py::class_<linflow::LinearCyclicSystem>(m, "LinearCyclicSystem")
      .def_property_readonly("dimension", &linflow::LinearCyclicSystem::dimension)
      .def_property_readonly("period", &linflow::LinearCyclicSystem::period)
      .def("coefficients", &linflow::LinearCyclicSystem::coefficients);
  m.def("constant_linear", &linflow::LinearCyclicSystem::constant, py::arg("a"), py::arg("period") = std::nullopt);
  m.def("random_periodic", &linflow::random_periodic, py::arg("n"), py::arg("seed"));
  m.def("linear_from_json", [](const std::string& text) {
    return linflow::LinearCyclicSystem(io::coefficient_spec_from_json(io::Json::parse(text)));
  });
  m.def("transition", [](const linflow::LinearCyclicSystem& s, double t0, double t1, double tol) {
    return linflow::transition(s, t0, t1, tol).value;
  }, py::arg("system"), py::arg("t0"), py::arg("t1"), py::arg("tol") = linflow::kDefaultTolerance);
  m.def("monodromy", [](const linflow::LinearCyclicSystem& s, double tol) { return linflow::monodromy(s, tol).value; },
        py::arg("system"), py::arg("tol") = linflow::kDefaultTolerance);
  m.def("sample_N_along", [](const linflow::LinearCyclicSystem& s, const Vector& x0, const std::vector<double>& grid) {
    return as_python(io::to_json(linflow::sample_N_along(s, x0, std::span<const double>(grid))));
  }, py::arg("system"), py::arg("x0"), py::arg("grid"));
  m.def("verify_cone_invariance", [](const linflow::LinearCyclicSystem& s, int h, double t, std::size_t samples,
                                     std::uint64_t seed) {
    return as_python(io::to_json(linflow::verify_cone_invariance(s, h, t, samples, seed)));
  }, py::arg("system"), py::arg("h"), py::arg("t"), py::arg("samples") = 1000, py::arg("seed") = 0);

  // spectra
  m.def("reference_matrix", &spectra::reference_matrix, py::arg("n"));
  m.def("split", [](const Matrix& l) { return as_python(io::to_json(spectra::split(l))); }, py::arg("l"));
  m.def("rank_certificate", &spectra::rank_certificate, py::arg("basis"), py::arg("h"), py::arg("seed") = 0);

  // orbits
  m.def("integrate", [](const model::CyclicSystem& s, const Vector& x0, double t0, double t1, double tol) {
    const auto traj = orbits::integrate(s, x0, t0, t1, tol);
    Matrix y(static_cast<Eigen::Index>(traj.y.size()), s.dimension());
    for (std::size_t k = 0; k < traj.y.size(); ++k) y.row(static_cast<Eigen::Index>(k)) = traj.y[k].transpose();
    return py::make_tuple(traj.t, y);
  }, py::arg("system"), py::arg("x0"), py::arg("t0"), py::arg("t1"), py::arg("tol") = 1e-10);
  m.def("find_equilibrium", [](const model::CyclicSystem& s, const Vector& guess) {
    return as_python(io::to_json(orbits::find_equilibrium(s, guess)));
  }, py::arg("system"), py::arg("guess"));
  m.def("find_periodic", [](const model::CyclicSystem& s, const Vector& guess, double period) {
    return as_python(io::to_json(orbits::find_periodic(s, guess, period)));
  }, py::arg("system"), py::arg("guess"), py::arg("period"));
  m.def("study_equilibrium_to_orbit", [](const model::CyclicSystem& s, double offset, double horizon) {
    orbits::StudyOptions o;
    o.offset = offset;
    o.horizon = horizon;
    const auto st = orbits::study_equilibrium_to_orbit(s, o);
    io::Json j;
    j["equilibrium"] = io::to_json(st.equilibrium);
    j["period"] = st.orbit.period;
    j["terminal_distance"] = st.connection.terminal_distance;
    j["transversality"] = io::to_json(st.report);
    return as_python(j);
  }, py::arg("system"), py::arg("offset") = 1e-6, py::arg("horizon") = 3000.0);
}
