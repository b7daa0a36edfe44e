#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "llab/commutator_lab.hpp"
#include "llab/config.hpp"
#include "llab/errors.hpp"
#include "llab/fgr.hpp"
#include "llab/linalg.hpp"
#include "llab/liouvillian.hpp"
#include "llab/report_cli.hpp"
#include "llab/thermal_field.hpp"

namespace py = pybind11;
using namespace llab;

namespace {

// JSON crosses the boundary as text; the Python wrapper handles (de)serialization.
Model model_from_text(const std::string& text, py::object beta) {
  const RunConfig cfg = parse_config(json::parse(text));
  return beta.is_none() ? build_model(cfg) : build_model(cfg, beta.cast<double>());
}

py::dict rates(const Model& m, double eps, bool use_oracle) {
  const RateReport r = rate_report(m.fgr_model(), m.modes, m.cfg.window, m.fgr_params(eps), m.beta,
                                   m.cfg.lambdas.front(), use_oracle);
  py::list entries;
  for (const auto& e : r.entries) {
    py::dict d;
    d["energy"] = e.energy;
    d["gamma"] = e.gamma;
    d["rank"] = e.rank;
    d["matrix"] = e.matrix;
    d["ionization_time"] = e.ionization_time;
    entries.append(d);
  }
  py::dict out;
  out["gamma"] = r.gamma;
  out["entries"] = entries;
  return out;
}

}  // namespace

PYBIND11_MODULE(_llab, mod) {
  mod.doc() = "Bindings for the llab C++ core";

  py::register_exception<ValidationError>(mod, "ValidationError", PyExc_ValueError);
  py::register_exception<AccuracyError>(mod, "AccuracyError", PyExc_ArithmeticError);

  mod.def("config_hash", [](const std::string& text) { return config_hash(json::parse(text)); });
  mod.def("validate_config", [](const std::string& text) { parse_config(json::parse(text)); });

  py::class_<Model>(mod, "Model")
      .def(py::init(&model_from_text), py::arg("config_json"), py::arg("beta") = py::none())
      .def_property_readonly("beta", [](const Model& m) { return m.beta; })
      .def_property_readonly("dim", [](const Model& m) { return m.space.dimension(); })
      .def_property_readonly("hamiltonian", [](const Model& m) { return CMat(m.hp); })
      .def_property_readonly("l0_diagonal", [](const Model& m) { return m.l0_diag; })
      .def_property_readonly("number_diagonal", [](const Model& m) { return m.number_diag; })
      .def_property_readonly("pi_mask", [](const Model& m) { return m.kit.pi; })
      .def_property_readonly("p_mask", [](const Model& m) { return m.kit.p; })
      .def("liouvillian", [](const Model& m, double lambda) { return CMat(m.L(lambda)); },
           py::arg("lam"))
      .def("spectrum", [](const Model& m, double lambda) { return eigvalsh(CMat(m.L(lambda))); },
           py::arg("lam"))
      .def("rates", &rates, py::arg("eps"), py::arg("use_oracle") = false)
      .def("kernel_dimension",
           [](const Model& m, double lambda) {
             return static_cast<int>(kernel_report(m.L(lambda), m.kit, m.cfg.zero_tol).candidates.size());
           },
           py::arg("lam"));

  mod.def("planck_weight", &planck_weight, py::arg("omega"), py::arg("beta"));
  mod.def("loglog_slope", &loglog_slope);

  mod.def(
      "run",
      [](const std::string& sub, const std::string& text, const std::string& out_dir, std::uint64_t seed,
         int threads) {
        const RunConfig cfg = parse_config(json::parse(text));
        RunContext ctx{out_dir, seed, resolve_threads(threads)};
        RunOutcome r;
        {
          py::gil_scoped_release release;
          r = run_subcommand(sub, cfg, ctx);
        }
        return py::make_tuple(r.exit_code, r.report.dump());
      },
      py::arg("subcommand"), py::arg("config_json"), py::arg("out_dir"), py::arg("seed") = 0,
      py::arg("threads") = 1);
}
