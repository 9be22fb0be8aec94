#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gfgr/diagnostics.hpp"
#include "gfgr/evolve.hpp"
#include "gfgr/io.hpp"
#include "gfgr/liouville.hpp"
#include "gfgr/runner.hpp"
#include "gfgr/scenario.hpp"
#include "gfgr/superop.hpp"

namespace py = pybind11;
using namespace gfgr;

namespace {

py::array_t<std::complex<double>> tensor_to_array(const RateTensor& t) {
  const auto d = static_cast<py::ssize_t>(t.dim());
  py::array_t<std::complex<double>> out({d, d, d, d});
  std::copy(t.entries().begin(), t.entries().end(), out.mutable_data());
  return out;
}

Method method_from(const std::string& name) {
  if (name == "exact-exponential") return Method::kExactExponential;
  if (name == "rk4") return Method::kRk4;
  if (name == "adaptive") return Method::kAdaptive;
  if (name == "auto") return Method::kAuto;
  throw ParameterError("unknown method '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coarse-grained Lindblad, conventional Markov and semiclassical dynamics";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ParameterError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DimensionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });

  py::class_<CoarseGrainedL>(m, "CoarseGrainedL")
      .def_readonly("matrix", &CoarseGrainedL::matrix)
      .def_property_readonly("t_bar", [](const CoarseGrainedL& l) { return l.params.t_bar(); })
      .def_property_readonly("eps_bar", [](const CoarseGrainedL& l) { return l.params.eps_bar(); })
      .def_property_readonly("energies", [](const CoarseGrainedL& l) { return l.basis.energies(); });

  m.def(
      "coarse_grained_L",
      [](const Matrix& hprime, std::vector<double> energies, double t_bar, double g, double hbar) {
        return build_coarse_grained_L(CouplingOperator(hprime, g), EnergyBasis(std::move(energies)),
                                      CoarseGrainingParams(t_bar, hbar));
      },
      py::arg("hprime"), py::arg("energies"), py::arg("t_bar"), py::arg("g") = 1.0,
      py::arg("hbar") = 1.0);

  m.def("gfgr_apply", &gfgr_apply, py::arg("lindblad"), py::arg("rho"));

  m.def(
      "gfgr_rate_tensor",
      [](const Matrix& hprime, std::vector<double> energies, double t_bar, double g, double hbar) {
        return tensor_to_array(gfgr_rate_tensor(CouplingOperator(hprime, g),
                                                EnergyBasis(std::move(energies)),
                                                CoarseGrainingParams(t_bar, hbar)));
      },
      py::arg("hprime"), py::arg("energies"), py::arg("t_bar"), py::arg("g") = 1.0,
      py::arg("hbar") = 1.0);

  m.def(
      "conventional_rate_tensor",
      [](const Matrix& hprime, std::vector<double> energies, double eta, double g, double hbar) {
        return tensor_to_array(conventional_rate_tensor(
            CouplingOperator(hprime, g), EnergyBasis(std::move(energies)), eta, hbar));
      },
      py::arg("hprime"), py::arg("energies"), py::arg("eta"), py::arg("g") = 1.0,
      py::arg("hbar") = 1.0);

  m.def(
      "smoothed_fgr_rates",
      [](const Matrix& hprime, std::vector<double> energies, double t_bar, double g, double hbar) {
        return smoothed_fgr_rates(CouplingOperator(hprime, g), EnergyBasis(std::move(energies)),
                                  CoarseGrainingParams(t_bar, hbar))
            .rates;
      },
      py::arg("hprime"), py::arg("energies"), py::arg("t_bar"), py::arg("g") = 1.0,
      py::arg("hbar") = 1.0);

  m.def(
      "fgr_rates",
      [](const Matrix& hprime, std::vector<double> energies, double eta, double g, double hbar) {
        return fgr_rates(CouplingOperator(hprime, g), EnergyBasis(std::move(energies)), eta, hbar)
            .rates;
      },
      py::arg("hprime"), py::arg("energies"), py::arg("eta"), py::arg("g") = 1.0,
      py::arg("hbar") = 1.0);

  py::class_<Generator>(m, "Generator")
      .def_static(
          "gfgr",
          [](const CoarseGrainedL& l, bool free_evolution) {
            return Generator::gfgr(l, free_evolution);
          },
          py::arg("lindblad"), py::arg("free_evolution") = false)
      .def_static(
          "conventional",
          [](const Matrix& hprime, std::vector<double> energies, double eta, double g,
             double hbar, bool free_evolution) {
            const CouplingOperator c(hprime, g);
            const EnergyBasis basis(std::move(energies));
            return Generator::conventional(c, completed_collision_kernel(c, basis, eta, hbar),
                                           hbar, free_evolution);
          },
          py::arg("hprime"), py::arg("energies"), py::arg("eta"), py::arg("g") = 1.0,
          py::arg("hbar") = 1.0, py::arg("free_evolution") = false)
      .def_property_readonly("name", &Generator::name)
      .def_property_readonly("dim", &Generator::dim)
      .def("apply", &Generator::apply, py::arg("rho"))
      .def("liouvillian", &Generator::liouvillian);

  py::class_<PropagationSpec>(m, "PropagationSpec")
      .def(py::init([](double t_final, double dt, const std::string& method,
                       std::size_t record_every) {
             PropagationSpec s;
             s.t_final = t_final;
             s.dt = dt;
             s.method = method_from(method);
             s.record_every = record_every;
             s.validate();
             return s;
           }),
           py::arg("t_final"), py::arg("dt"), py::arg("method") = "exact-exponential",
           py::arg("record_every") = 1)
      .def_readonly("t_final", &PropagationSpec::t_final)
      .def_readonly("dt", &PropagationSpec::dt)
      .def("snapshot_times", &PropagationSpec::snapshot_times);

  py::class_<TrajectoryRecord>(m, "Trajectory")
      .def_readonly("times", &TrajectoryRecord::times)
      .def_readonly("states", &TrajectoryRecord::states)
      .def_readonly("notices", &TrajectoryRecord::notices)
      .def_property_readonly("min_eigenvalues",
                             [](const TrajectoryRecord& t) {
                               std::vector<double> out;
                               for (const auto& d : t.diagnostics) out.push_back(d.min_eigenvalue);
                               return out;
                             })
      .def_property_readonly("traces", [](const TrajectoryRecord& t) {
        std::vector<double> out;
        for (const auto& d : t.diagnostics) out.push_back(d.trace);
        return out;
      });

  m.def("propagate", &propagate_master, py::arg("generator"), py::arg("rho0"), py::arg("spec"));

  m.def(
      "t3_coefficient",
      [](const Generator& g) {
        const T3Report r = t3_coefficient(g);
        py::dict d;
        d["coordinates"] = Eigen::Matrix4d(r.coordinates);
        d["t3_norm"] = r.t3_norm;
        d["population_from_coherence"] = r.population_from_coherence;
        d["coherence_from_population"] = r.coherence_from_population;
        d["t1_rate"] = r.t1_rate;
        d["t2_rate"] = r.t2_rate;
        return d;
      },
      py::arg("generator"));

  m.def(
      "fgr_convergence",
      [](std::size_t levels, double spacing, double coupling, std::vector<double> eps_bars) {
        LadderScenario ladder;
        ladder.levels = levels;
        ladder.spacing = spacing;
        ladder.coupling = coupling;
        const ConvergenceTable t = fgr_convergence(ladder, eps_bars);
        py::list rows;
        for (const ConvergenceRow& r : t.rows) {
          py::dict d;
          d["eps_bar"] = r.eps_bar;
          d["total_rate"] = r.total_rate;
          d["golden_rule_rate"] = r.golden_rule_rate;
          d["relative_error"] = r.relative_error;
          d["relative_error_excluding_self"] = r.relative_error_excluding_self;
          d["scale_separated"] = r.scale_separated;
          rows.append(d);
        }
        return rows;
      },
      py::arg("levels"), py::arg("spacing"), py::arg("coupling"), py::arg("eps_bars"));

  m.def(
      "validate_state",
      [](const Matrix& rho) {
        const ValidationReport r = validate_state(rho);
        py::dict d;
        d["passed"] = r.passed();
        d["hermitian"] = r.hermitian;
        d["unit_trace"] = r.unit_trace;
        d["positive"] = r.positive;
        d["min_eigenvalue"] = r.min_eigenvalue;
        return d;
      },
      py::arg("rho"));

  m.def(
      "tensor_product", [](const Matrix& a, const Matrix& b) { return tensor_product(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "partial_trace",
      [](const Matrix& rho, std::size_t dim_a, std::size_t dim_b, bool keep_first) {
        return partial_trace(rho, Factorization{dim_a, dim_b},
                             keep_first ? Factor::kFirst : Factor::kSecond);
      },
      py::arg("rho"), py::arg("dim_a"), py::arg("dim_b"), py::arg("keep_first") = true);
  m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

  m.def(
      "parse_scenario",
      [](const std::string& text) { return serialize_scenario(parse_scenario_text(text)); },
      py::arg("text"), "Parse and validate scenario text; returns its canonical serialization.");

  m.def(
      "run_scenario",
      [](const std::filesystem::path& path, const std::filesystem::path& out_dir) {
        RunOptions options;
        options.out_dir = out_dir;
        options.source_text = io::read_file(path);
        const RunResult r = run_scenario(parse_scenario_text(*options.source_text), options);
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["directory"] = r.directory;
        d["files"] = r.files;
        return d;
      },
      py::arg("path"), py::arg("out_dir"));
}
