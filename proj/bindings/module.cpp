// Python bindings for the main solver operations.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wgflow/diagnostics.hpp"
#include "wgflow/energy.hpp"
#include "wgflow/jko.hpp"
#include "wgflow/measure.hpp"
#include "wgflow/selfsimilar.hpp"

namespace py = pybind11;
using namespace wgflow;

PYBIND11_MODULE(_wgflow, m) {
  m.doc() = "1D Wasserstein gradient flows on the quantile representation";

  py::class_<QuantileMeasure>(m, "QuantileMeasure")
      .def(py::init<std::vector<double>>(), py::arg("values"))
      .def_property_readonly("n", &QuantileMeasure::n)
      .def("values", &QuantileMeasure::values)
      .def("strictly_increasing", &QuantileMeasure::strictly_increasing)
      .def("mean", &QuantileMeasure::mean)
      .def("second_moment", &QuantileMeasure::second_moment)
      .def("__len__", &QuantileMeasure::n)
      .def("__getitem__",
           [](const QuantileMeasure& q, int i) {
             if (i < 0 || i >= q.n()) throw py::index_error();
             return q[i];
           });

  py::class_<DensityView>(m, "DensityView")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("grid"),
           py::arg("values"))
      .def_readonly("grid", &DensityView::grid)
      .def_readonly("values", &DensityView::values)
      .def("trapezoid_mass", &DensityView::trapezoid_mass);

  m.def("uniform_quantiles", &uniform_quantiles, py::arg("n"), py::arg("a"), py::arg("b"));
  m.def("gaussian_quantiles", &gaussian_quantiles, py::arg("n"), py::arg("mean"),
        py::arg("sigma"));
  m.def("semicircle_quantiles", &semicircle_quantiles, py::arg("n"), py::arg("gamma"));
  m.def(
      "atoms_to_quantile",
      [](const std::vector<double>& pts, int n) {
        return atoms_to_quantile(EmpiricalAtoms(pts), n);
      },
      py::arg("points"), py::arg("n"));
  m.def("quantile_from_density", &quantile_from_density, py::arg("view"), py::arg("n"));
  m.def(
      "density_from_quantile",
      [](const QuantileMeasure& q, const std::vector<double>& grid) {
        return density_from_quantile(q, grid);
      },
      py::arg("q"), py::arg("grid"));

  m.def("wasserstein2", &wasserstein2, py::arg("a"), py::arg("b"));
  m.def("displacement_interpolate", &displacement_interpolate, py::arg("a"), py::arg("b"),
        py::arg("t"));
  m.def("isotonic_project", &isotonic_project, py::arg("values"));

  py::enum_<KernelKind>(m, "KernelKind")
      .value("Log", KernelKind::Log)
      .value("PowerLaw", KernelKind::PowerLaw);

  py::class_<InteractionKernel>(m, "InteractionKernel")
      .def(py::init<>())
      .def_static("log_kernel", &InteractionKernel::log_kernel, py::arg("gamma"),
                  py::arg("lambda_w") = 1.0)
      .def_static("power_law", &InteractionKernel::power_law, py::arg("beta"),
                  py::arg("lambda_w") = 1.0)
      .def_readwrite("kind", &InteractionKernel::kind)
      .def_readwrite("gamma", &InteractionKernel::gamma)
      .def_readwrite("beta", &InteractionKernel::beta)
      .def_readwrite("lambda_w", &InteractionKernel::lambda_w);

  py::class_<EnergyParams>(m, "EnergyParams")
      .def(py::init<>())
      .def_readwrite("kappa", &EnergyParams::kappa)
      .def_readwrite("alpha", &EnergyParams::alpha)
      .def_readwrite("kernel", &EnergyParams::kernel);

  m.def("entropy", &entropy, py::arg("q"));
  m.def("confinement", &confinement, py::arg("q"));
  m.def("interaction", &interaction, py::arg("q"), py::arg("kernel"));
  m.def("free_energy", &free_energy, py::arg("q"), py::arg("params"));
  m.def("energy_gradient", &energy_gradient, py::arg("q"), py::arg("params"));
  m.def("is_saturated", &is_saturated, py::arg("energy"));

  py::class_<LowerBounds>(m, "LowerBounds")
      .def_readonly("positivity", &LowerBounds::positivity)
      .def_readonly("unif_baixo", &LowerBounds::unif_baixo)
      .def_readonly("jensen", &LowerBounds::jensen)
      .def_readonly("gaussian", &LowerBounds::gaussian)
      .def_readonly("floor", &LowerBounds::floor);
  m.def("lower_bounds", &lower_bounds, py::arg("params"));

  py::class_<JkoConfig>(m, "JkoConfig")
      .def(py::init<>())
      .def_readwrite("tau", &JkoConfig::tau)
      .def_readwrite("max_inner_iters", &JkoConfig::max_inner_iters)
      .def_readwrite("grad_tol", &JkoConfig::grad_tol)
      .def_readwrite("obj_tol", &JkoConfig::obj_tol)
      .def_readwrite("backtrack_shrink", &JkoConfig::backtrack_shrink)
      .def_readwrite("armijo_c", &JkoConfig::armijo_c);

  m.def("jko_objective", &jko_objective, py::arg("candidate"), py::arg("prev"),
        py::arg("tau"), py::arg("params"));
  m.def(
      "jko_step",
      [](const QuantileMeasure& prev, const JkoConfig& cfg, const EnergyParams& p) {
        return jko_step(prev, cfg, p);
      },
      py::arg("prev"), py::arg("config"), py::arg("params"));

  py::class_<FlowTrajectory>(m, "FlowTrajectory")
      .def_readonly("times", &FlowTrajectory::times)
      .def_readonly("states", &FlowTrajectory::states)
      .def_readonly("energies", &FlowTrajectory::energies)
      .def_readonly("step_distances", &FlowTrajectory::step_distances)
      .def_readonly("dissipation_sums", &FlowTrajectory::dissipation_sums)
      .def_readonly("tau", &FlowTrajectory::tau)
      .def("steps", &FlowTrajectory::steps);
  m.def("run_flow", &run_flow, py::arg("initial"), py::arg("steps"), py::arg("config"),
        py::arg("params"));

  py::class_<DissipationReport>(m, "DissipationReport")
      .def_readonly("energy_drop", &DissipationReport::energy_drop)
      .def_readonly("dissipation_sum", &DissipationReport::dissipation_sum)
      .def_readonly("ratio", &DissipationReport::ratio);
  m.def("dissipation_report", &dissipation_report, py::arg("trajectory"));

  py::class_<EquilibriumSpec>(m, "EquilibriumSpec")
      .def_readonly("theta", &EquilibriumSpec::theta)
      .def_readonly("state", &EquilibriumSpec::state)
      .def_readonly("grad_norm", &EquilibriumSpec::grad_norm)
      .def_readonly("init_spread", &EquilibriumSpec::init_spread);
  m.def("minimize_energy", &minimize_energy, py::arg("params"), py::arg("n"),
        py::arg("config"));

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("rate", &RateFit::rate)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("residual", &RateFit::residual);
  m.def("fit_decay_rate", &fit_decay_rate, py::arg("times"), py::arg("values"),
        py::arg("floor"));

  m.def("to_selfsimilar", &to_selfsimilar, py::arg("q"), py::arg("t"));
  m.def("from_selfsimilar", &from_selfsimilar, py::arg("q"), py::arg("tau"));
}
