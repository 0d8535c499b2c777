#include "bmt/bounds.hpp"
#include "bmt/config.hpp"
#include "bmt/experiments.hpp"
#include "bmt/follmer.hpp"
#include "bmt/inequalities.hpp"
#include "bmt/malliavin.hpp"
#include "bmt/measures.hpp"
#include "bmt/posterior.hpp"
#include "bmt/wiener_maps.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace bmt;

namespace {

std::shared_ptr<const TimeGrid> geometric(double rho, double eps_end) {
  return std::make_shared<const TimeGrid>(TimeGrid::geometric(rho, eps_end));
}

// Endpoints of n paths as an (n, d) array; failed paths are NaN rows.
Mat endpoints(const TargetMeasure& m, std::size_t n, std::uint64_t seed, double rho, double eps_end, int workers) {
  Ensemble e;
  {
    py::gil_scoped_release release;
    e = simulate_ensemble(m, geometric(rho, eps_end), n, seed, workers, false);
  }
  Mat out = Mat::Constant(static_cast<Eigen::Index>(n), m.dim(), std::nan(""));
  for (std::size_t i = 0; i < n; ++i)
    if (!e.paths[i].failed) out.row(static_cast<Eigen::Index>(i)) = e.paths[i].endpoint.transpose();
  return out;
}

py::dict run(const std::map<std::string, std::string>& entries) {
  Config c;
  for (const auto& [k, v] : entries) c.set(k, v);
  const ExperimentConfig cfg = ExperimentConfig::from(c);
  std::ostringstream log;
  ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = run_experiment(cfg, log);
  }
  py::list checks;
  for (const auto& ch : r.checks) {
    py::dict d;
    d["name"] = ch.name;
    d["passed"] = ch.passed;
    d["values"] = ch.values;
    d["note"] = ch.note;
    checks.append(d);
  }
  py::dict tables;
  for (const auto& [name, t] : r.tables) tables[py::str(name)] = t.str();
  py::dict out;
  out["experiment"] = cfg.experiment;
  out["passed"] = r.passed();
  out["checks"] = checks;
  out["tables"] = tables;
  out["log"] = log.str();
  return out;
}

}  // namespace

PYBIND11_MODULE(_bmt, mod) {
  mod.doc() = "Brownian transport maps: Follmer process, Malliavin norms and contraction bounds";

  py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);

  py::class_<TargetMeasure>(mod, "TargetMeasure")
      .def_property_readonly("dim", &TargetMeasure::dim)
      .def_property_readonly("kappa", &TargetMeasure::kappa)
      .def_property_readonly("diam", &TargetMeasure::diam)
      .def_property_readonly("label", &TargetMeasure::label)
      .def("log_f", &TargetMeasure::log_f, py::arg("x"))
      .def("grad_log_f", &TargetMeasure::grad_log_f, py::arg("x"))
      .def("pdf", &TargetMeasure::pdf, py::arg("x"))
      .def("cdf", &TargetMeasure::cdf, py::arg("x"))
      .def("quantile", &TargetMeasure::quantile, py::arg("u"))
      .def("__repr__", [](const TargetMeasure& m) {
        return "<TargetMeasure " + m.label() + " d=" + std::to_string(m.dim()) + ">";
      });

  mod.def("gaussian", &make_gaussian, py::arg("mean"), py::arg("cov"));
  mod.def("standard_gaussian", &make_standard_gaussian, py::arg("d"));
  mod.def("truncated_gaussian", &make_truncated_gaussian, py::arg("sigma"));
  mod.def("uniform_interval", &make_uniform_interval, py::arg("S"), py::arg("lower") = 0.0);
  mod.def("uniform_ball", &make_uniform_ball, py::arg("S"), py::arg("d"));
  mod.def("isotropic_uniform", &make_isotropic_uniform, py::arg("d"));
  mod.def(
      "gaussian_mixture",
      [](const std::vector<Vec>& atoms, const std::vector<double>& weights) {
        return make_gaussian_mixture(MixtureSpec{atoms, weights});
      },
      py::arg("atoms"), py::arg("weights"));
  mod.def("relative_entropy", &relative_entropy, py::arg("measure"));

  mod.def("drift", &drift, py::arg("measure"), py::arg("t"), py::arg("x"));
  mod.def("drift_jacobian", &drift_jacobian, py::arg("measure"), py::arg("t"), py::arg("x"));
  mod.def("log_heat_semigroup", &log_heat_semigroup, py::arg("measure"), py::arg("t"), py::arg("x"));

  mod.def("endpoints", &endpoints, py::arg("measure"), py::arg("n"), py::arg("seed") = 1, py::arg("rho") = 0.9,
          py::arg("eps_end") = 1e-4, py::arg("workers") = 1);
  mod.def(
      "malliavin_norms_sq",
      [](const TargetMeasure& m, std::size_t n, std::uint64_t seed, double rho, double eps_end, int workers) {
        py::gil_scoped_release release;
        return malliavin_norms_sq(m, geometric(rho, eps_end), n, seed, workers);
      },
      py::arg("measure"), py::arg("n"), py::arg("seed") = 1, py::arg("rho") = 0.9, py::arg("eps_end") = 1e-4,
      py::arg("workers") = 1);

  py::class_<BoundProfile>(mod, "BoundProfile")
      .def_property_readonly("regime", [](const BoundProfile& p) { return std::string(to_string(p.regime)); })
      .def_readonly("kappa", &BoundProfile::kappa)
      .def_readonly("S", &BoundProfile::S)
      .def_readonly("R", &BoundProfile::R)
      .def_readonly("switch_time", &BoundProfile::switch_time)
      .def_readonly("constant_sq", &BoundProfile::constant_sq)
      .def("theta", &BoundProfile::theta, py::arg("t"));
  mod.def("theta_profile", &theta_profile, py::arg("kappa"), py::arg("S"));
  mod.def("mixture_profile", &mixture_profile, py::arg("R"));
  mod.def("profile_for", &profile_for, py::arg("measure"));
  mod.def(
      "gronwall_integral", [](const BoundProfile& p, double t) { return gronwall_integral(p, t).value; },
      py::arg("profile"), py::arg("t"));
  mod.def("gronwall_quadrature", &gronwall_quadrature, py::arg("profile"), py::arg("t"));
  mod.def("mixture_constant", &mixture_constant, py::arg("R"));

  mod.def("find_c", &find_c);

  mod.def("experiments", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : experiment_catalog()) out.emplace_back(e.name, e.description);
    return out;
  });
  mod.def("run_experiment", &run, py::arg("config"),
          "Run an experiment from flat config keys; returns checks, CSV tables and the log.");
}
