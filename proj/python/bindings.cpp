#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "portpmp/bench.hpp"
#include "portpmp/direct_oracle.hpp"
#include "portpmp/indirect.hpp"
#include "portpmp/model.hpp"

namespace py = pybind11;
using namespace portpmp;

namespace {

// Stack a node-wise history into a (nodes, width) array.
Eigen::MatrixXd stack(const std::vector<Vector>& rows) {
  const Eigen::Index width = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

py::dict trajectory_dict(const Trajectory& tr) {
  py::dict d;
  d["t"] = Vector(Eigen::Map<const Vector>(tr.t.data(), static_cast<Eigen::Index>(tr.t.size())));
  d["q"] = stack(tr.q);
  d["lambda"] = stack(tr.lambda);
  d["u"] = stack(tr.u);
  d["f"] = stack(tr.f);
  d["fprime"] = stack(tr.fprime);
  d["e"] = stack(tr.e);
  d["eprime"] = stack(tr.eprime);
  d["y"] = Vector(Eigen::Map<const Vector>(tr.y.data(), static_cast<Eigen::Index>(tr.y.size())));
  d["I"] = Vector(Eigen::Map<const Vector>(tr.I.data(), static_cast<Eigen::Index>(tr.I.size())));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Indirect and direct optimal control solvers for port-driven systems";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<UnboundedHamiltonian>(m, "UnboundedHamiltonian", error.ptr());
  py::register_exception<SolverFailed>(m, "SolverFailed", error.ptr());

  py::class_<ControlProblem>(m, "ControlProblem")
      .def_readonly("n", &ControlProblem::n)
      .def_readonly("l", &ControlProblem::l)
      .def_readonly("k", &ControlProblem::k)
      .def_readonly("t1", &ControlProblem::t1)
      .def("serialize", [](const ControlProblem& p) { return serialize(p); })
      .def("with_parameter", [](const ControlProblem& p, const std::string& name, double value) {
        return with_parameter(p, name, value);
      })
      .def(py::self == py::self);

  m.def("load_problem", [](const std::string& text) { return load_problem(text); }, py::arg("text"));
  m.def("load_problem_file", &load_problem_file, py::arg("path"));
  m.def("validate", [](const ControlProblem& p) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& d : validate(p)) out.emplace_back(d.field, d.message);
    return out;
  });

  py::enum_<NuMode>(m, "NuMode")
      .value("auto", NuMode::kAuto)
      .value("normal", NuMode::kNormal)
      .value("abnormal", NuMode::kAbnormal);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("steps", &SolverConfig::steps)
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("max_newton", &SolverConfig::max_newton)
      .def_readwrite("grid_points", &SolverConfig::grid_points)
      .def_readwrite("nu_mode", &SolverConfig::nu_mode)
      .def_readwrite("seeds", &SolverConfig::seeds)
      .def_readwrite("parallel", &SolverConfig::parallel);

  py::class_<Extremal>(m, "Extremal")
      .def_readonly("nu", &Extremal::nu)
      .def_readonly("lambda0", &Extremal::lambda0)
      .def_readonly("cost", &Extremal::cost)
      .def_readonly("residual", &Extremal::residual)
      .def_readonly("nontrivial", &Extremal::nontrivial)
      .def_readonly("iterations", &Extremal::iterations)
      .def_property_readonly("trajectory", [](const Extremal& e) { return trajectory_dict(e.trajectory); })
      .def("residual_norm", &Extremal::residual_norm);

  m.def("solve", &solve, py::arg("problem"), py::arg("config") = SolverConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("maximize_hamiltonian",
        [](const ControlProblem& p, const Vector& lambda, const Vector& q, double t, double nu) {
          return maximize_hamiltonian(Dynamics(p), lambda, q, t, nu);
        },
        py::arg("problem"), py::arg("lam"), py::arg("q"), py::arg("t"), py::arg("nu"));

  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("nontrivial", &CertificateReport::nontrivial)
      .def_readonly("maximal", &CertificateReport::maximal)
      .def_readonly("nu_sign", &CertificateReport::nu_sign)
      .def_readonly("adjoint_consistent", &CertificateReport::adjoint_consistent)
      .def_readonly("constant_hamiltonian", &CertificateReport::constant_hamiltonian)
      .def("passed", &CertificateReport::passed)
      .def("summary", &CertificateReport::summary);
  m.def("check_certificate",
        [](const Extremal& e, const ControlProblem& p) { return check_certificate(e, p); });

  py::class_<DirectOptions>(m, "DirectOptions")
      .def(py::init<>())
      .def_readwrite("intervals", &DirectOptions::intervals)
      .def_readwrite("substeps", &DirectOptions::substeps)
      .def_readwrite("rho_start", &DirectOptions::rho_start)
      .def_readwrite("rho_end", &DirectOptions::rho_end);

  py::class_<DirectSolution>(m, "DirectSolution")
      .def_readonly("intervals", &DirectSolution::intervals)
      .def_readonly("cost", &DirectSolution::cost)
      .def_readonly("defect_norm", &DirectSolution::defect_norm)
      .def_readonly("converged", &DirectSolution::converged)
      .def_property_readonly("controls", [](const DirectSolution& d) { return stack(d.controls); })
      .def("control_at", &DirectSolution::control_at);

  m.def("solve_direct", &solve_direct, py::arg("problem"), py::arg("options") = DirectOptions{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<CompareReport>(m, "CompareReport")
      .def_readonly("indirect_cost", &CompareReport::indirect_cost)
      .def_readonly("direct_cost", &CompareReport::direct_cost)
      .def_readonly("relative_gap", &CompareReport::relative_gap)
      .def_readonly("control_rms", &CompareReport::control_rms)
      .def_readonly("passed", &CompareReport::passed)
      .def("summary", &CompareReport::summary);
  m.def("compare", &compare, py::arg("extremal"), py::arg("direct"), py::arg("tol_rel") = 0.02);

  py::class_<CheapestStopParams>(m, "CheapestStopParams")
      .def(py::init<>())
      .def_readwrite("x0", &CheapestStopParams::x0)
      .def_readwrite("v0", &CheapestStopParams::v0)
      .def_readwrite("x1", &CheapestStopParams::x1)
      .def_readwrite("t1", &CheapestStopParams::t1)
      .def_readwrite("A", &CheapestStopParams::A)
      .def_readwrite("B", &CheapestStopParams::B)
      .def_readwrite("f", &CheapestStopParams::f)
      .def_readwrite("fprime", &CheapestStopParams::fprime);

  py::class_<AnalyticSolution>(m, "AnalyticSolution")
      .def_readonly("alpha", &AnalyticSolution::alpha)
      .def_readonly("beta", &AnalyticSolution::beta)
      .def_readonly("cost", &AnalyticSolution::cost);

  m.def("classic_problem", &classic_problem, py::arg("params") = CheapestStopParams{});
  m.def("ported_problem", &ported_problem, py::arg("params") = CheapestStopParams{});
  m.def("analytic_classic", &analytic_classic, py::arg("params") = CheapestStopParams{});
}
