#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinsense/dephasing.hpp"
#include "spinsense/dynamics.hpp"
#include "spinsense/liouville.hpp"
#include "spinsense/network.hpp"
#include "spinsense/optimizer.hpp"
#include "spinsense/rim.hpp"
#include "spinsense/sensitivity.hpp"
#include "spinsense/stats.hpp"

namespace py = pybind11;
using namespace spinsense;

PYBIND11_MODULE(_spinsense, m) {
  m.doc() = "bias-field controller synthesis and dephasing robustness analysis";

  py::enum_<Topology>(m, "Topology")
      .value("Chain", Topology::Chain)
      .value("Ring", Topology::Ring);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("A", Algorithm::A)
      .value("B", Algorithm::B)
      .value("C", Algorithm::C);

  py::class_<SpinNetwork>(m, "SpinNetwork")
      .def(py::init([](int size, Topology topology, double coupling) {
             return SpinNetwork{size, topology, coupling, 0.0};
           }),
           py::arg("size"), py::arg("topology"), py::arg("coupling") = 1.0)
      .def_readonly("size", &SpinNetwork::size)
      .def_readonly("topology", &SpinNetwork::topology);

  py::class_<Controller>(m, "Controller")
      .def(py::init([](Eigen::VectorXd biases, double readout_time, int input_spin,
                       int output_spin) {
             return Controller{std::move(biases), readout_time, input_spin, output_spin, -1.0};
           }),
           py::arg("biases"), py::arg("readout_time"), py::arg("input_spin") = 1,
           py::arg("output_spin"))
      .def_readonly("biases", &Controller::biases)
      .def_readonly("readout_time", &Controller::readout_time)
      .def_readonly("input_spin", &Controller::input_spin)
      .def_readonly("output_spin", &Controller::output_spin)
      .def_readonly("nominal_error", &Controller::nominal_error);

  py::class_<HamiltonianSS>(m, "HamiltonianSS")
      .def_readonly("matrix", &HamiltonianSS::matrix)
      .def_readonly("eigenvalues", &HamiltonianSS::eigenvalues)
      .def("projector", &HamiltonianSS::projector)
      .def("num_groups",
           [](const HamiltonianSS& h) { return static_cast<int>(h.groups.size()); });

  m.def("build_hamiltonian", &build_hamiltonian, py::arg("net"), py::arg("controller"));
  m.def("transfer_targets", &transfer_targets, py::arg("net"));

  py::class_<HermitianBasis>(m, "HermitianBasis")
      .def(py::init<int>(), py::arg("n"))
      .def("size", &HermitianBasis::size)
      .def("element", [](const HermitianBasis& b, int k) { return b[k]; });

  py::class_<LiouvilleSystem>(m, "LiouvilleSystem")
      .def_static("build", &LiouvilleSystem::build, py::arg("hamiltonian"),
                  py::arg("input_spin"), py::arg("output_spin"))
      .def_readonly("a", &LiouvilleSystem::A)
      .def_readonly("r0", &LiouvilleSystem::r0)
      .def_readonly("c", &LiouvilleSystem::c);

  py::class_<DephasingOp>(m, "DephasingOp")
      .def_readonly("c", &DephasingOp::c)
      .def_readonly("s", &DephasingOp::S)
      .def_readonly("rates", &DephasingOp::rates);

  py::class_<DephasingSet>(m, "DephasingSet")
      .def_readonly("ops", &DephasingSet::ops)
      .def_readonly("seed", &DephasingSet::seed)
      .def("size", [](const DephasingSet& s) { return static_cast<int>(s.ops.size()); });

  m.def("generate_dephasing_set", &generate_set, py::arg("hamiltonian"), py::arg("basis"),
        py::arg("count"), py::arg("seed"));

  py::class_<StrengthGrid>(m, "StrengthGrid")
      .def(py::init([](int steps, double max_delta) {
             return StrengthGrid{steps, max_delta};
           }),
           py::arg("steps") = 1000, py::arg("max_delta") = 0.1)
      .def("delta", &StrengthGrid::delta)
      .def("size", &StrengthGrid::size);

  py::class_<ErrorEvaluator>(m, "ErrorEvaluator")
      .def(py::init<const HamiltonianSS&, int, int>(), py::arg("hamiltonian"),
           py::arg("input_spin"), py::arg("output_spin"))
      .def("nominal_error", &ErrorEvaluator::nominal_error, py::arg("t"))
      .def("perturbed_error", &ErrorEvaluator::perturbed_error, py::arg("t"), py::arg("op"),
           py::arg("delta"));

  py::class_<ErrorGrid>(m, "ErrorGrid")
      .def_readonly("controller_id", &ErrorGrid::controller_id)
      .def_readonly("values", &ErrorGrid::values);

  m.def("compute_error_grid", &compute_error_grid, py::arg("evaluator"), py::arg("t"),
        py::arg("set"), py::arg("grid"), py::arg("controller_id") = 0, py::arg("jobs") = 1);

  py::class_<RimCurve>(m, "RimCurve")
      .def_readonly("values", &RimCurve::values)
      .def_readonly("adjusted", &RimCurve::adjusted)
      .def("at_delta", &RimCurve::at_delta, py::arg("delta"));

  m.def("rim1_curve", &rim1_curve, py::arg("grid"));

  py::class_<SensitivityRecord>(m, "SensitivityRecord")
      .def_readonly("e_T", &SensitivityRecord::e_T)
      .def_readonly("s_a", &SensitivityRecord::s_a)
      .def_readonly("s_k", &SensitivityRecord::s_k)
      .def_readonly("zeta_a", &SensitivityRecord::zeta_a)
      .def_readonly("zeta_k", &SensitivityRecord::zeta_k)
      .def_readonly("degenerate", &SensitivityRecord::degenerate);

  m.def("compute_sensitivity_record", &compute_sensitivity_record, py::arg("evaluator"),
        py::arg("t"), py::arg("set"), py::arg("grid"), py::arg("controller_id") = 0);

  m.def(
      "kendall_tau",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return kendall_tau(x, y);
      },
      py::arg("x"), py::arg("y"));

  py::class_<TauResult>(m, "TauResult")
      .def_readonly("tau", &TauResult::tau)
      .def_readonly("z", &TauResult::z)
      .def_readonly("p", &TauResult::p)
      .def("rejects",
           [](const TauResult& r) { return r.decision == Decision::RejectH0; });

  m.def(
      "tau_significance",
      [](double tau, int n, bool concordance, double alpha) {
        return tau_significance(tau, n, concordance ? Tail::Concordance : Tail::Discordance,
                                alpha);
      },
      py::arg("tau"), py::arg("n"), py::arg("concordance") = true, py::arg("alpha") = 0.05);

  py::class_<OptimizationConfig>(m, "OptimizationConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &OptimizationConfig::algorithm)
      .def_readwrite("restarts", &OptimizationConfig::restarts)
      .def_readwrite("seed", &OptimizationConfig::seed)
      .def_readwrite("keep", &OptimizationConfig::keep);

  py::class_<ControllerSet>(m, "ControllerSet")
      .def_readonly("controllers", &ControllerSet::controllers);

  m.def("synthesize_set", &synthesize_set, py::arg("net"), py::arg("output_spin"),
        py::arg("config"), py::arg("jobs") = 1);
}
