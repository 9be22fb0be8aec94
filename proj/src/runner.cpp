#include "gfgr/runner.hpp"

#include <algorithm>

#include <chrono>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "gfgr/io.hpp"
#include "gfgr/superop.hpp"

#ifndef GFGR_VERSION
#define GFGR_VERSION "0.0.0"
#endif

namespace gfgr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Tracks everything written into one scenario directory.
class OutputSet {
 public:
  OutputSet(fs::path dir, std::string command, const Scenario& s, const RunOptions& options)
      : dir_(std::move(dir)), command_(std::move(command)), start_(Clock::now()) {
    const std::string input = options.source_text ? *options.source_text : serialize_scenario(s);
    manifest_["scenario"] = s.name;
    manifest_["command"] = command_;
    manifest_["seed"] = s.seed;
    manifest_["inputs_sha256"] = io::sha256_hex(input);
    manifest_["versions"] = {
        {"gfgr", GFGR_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION}};
  }

  const fs::path& dir() const { return dir_; }

  template <typename Fn>
  void write(const std::string& name, Fn&& fill) {
    std::ostringstream os;
    fill(os);
    io::write_file(dir_ / name, os.str());
    files_.push_back(name);
  }

  json& manifest() { return manifest_; }

  RunResult finish(RunResult result) {
    json files = json::array();
    for (const auto& f : files_) {
      const std::string bytes = io::read_file(dir_ / f);
      files.push_back({{"path", f}, {"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    json gens = json::array();
    for (const auto& g : result.generators) {
      json entry = {{"name", g.name}, {"status", g.ok ? "ok" : "failed"}};
      if (!g.ok) entry["error"] = g.error;
      if (!g.notices.empty()) entry["notices"] = g.notices;
      if (g.positivity) {
        entry["min_eigenvalue"] = g.positivity->global_min;
        entry["positivity_violated"] = g.positivity->violated();
        if (g.positivity->first_violation_time) {
          entry["first_violation_time"] = *g.positivity->first_violation_time;
        }
      }
      gens.push_back(std::move(entry));
    }
    manifest_["files"] = std::move(files);
    manifest_["generators"] = std::move(gens);
    manifest_["exit_code"] = result.exit_code;
    manifest_["wall_time_seconds"] =
        std::chrono::duration<double>(Clock::now() - start_).count();
    io::write_file(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    result.directory = dir_;
    result.files = files_;
    return result;
  }

 private:
  using Clock = std::chrono::steady_clock;
  fs::path dir_;
  std::string command_;
  Clock::time_point start_;
  std::vector<std::string> files_;
  json manifest_;
};

bool has_generator(const Scenario& s, GeneratorKind k) {
  return std::find(s.generators.begin(), s.generators.end(), k) != s.generators.end();
}

std::vector<Generator> build_all(const Scenario& s) {
  std::vector<Generator> out;
  for (GeneratorKind k : s.generators) out.push_back(build_generator(s, k));
  return out;
}

void write_rates(OutputSet& out, const Scenario& s) {
  const std::size_t dim = s.energies.size();
  if (dim > kRateTensorMaxDim) return;
  const EnergyBasis basis = s.basis();
  const CouplingOperator hprime = s.coupling_operator();
  const CoarseGrainingParams params = s.coarse_graining();
  if (has_generator(s, GeneratorKind::kGfgr) || has_generator(s, GeneratorKind::kProjected)) {
    const RateTensor t = gfgr_rate_tensor(hprime, basis, params);
    out.write("gfgr_rate_tensor.csv", [&](std::ostream& os) { io::write_rate_tensor_csv(os, t); });
    const SemiclassicalRates r = smoothed_fgr_rates(hprime, basis, params);
    out.write("gfgr_semiclassical_rates.csv",
              [&](std::ostream& os) { io::write_semiclassical_csv(os, r); });
  }
  if (has_generator(s, GeneratorKind::kConventional)) {
    const double eta = s.conventional_width();
    const RateTensor t = conventional_rate_tensor(hprime, basis, eta, s.hbar);
    out.write("conventional_rate_tensor.csv",
              [&](std::ostream& os) { io::write_rate_tensor_csv(os, t); });
    const SemiclassicalRates r = fgr_rates(hprime, basis, eta, s.hbar);
    out.write("conventional_semiclassical_rates.csv",
              [&](std::ostream& os) { io::write_semiclassical_csv(os, r); });
  }
}

// T3 at the scenario's t_bar plus every t_bar of the audit grid.
void write_t3(OutputSet& out, const Scenario& s) {
  if (s.energies.size() != 2) return;
  std::vector<std::string> labels;
  std::vector<double> t_bars;
  std::vector<T3Report> reports;
  // scenario t_bar plus the audit grid, ascending, without repeats
  std::vector<double> grid{s.coarse_graining().t_bar()};
  grid.insert(grid.end(), s.audit.t_bar_grid.begin(), s.audit.t_bar_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (GeneratorKind k : s.generators) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i > 0 && k == GeneratorKind::kConventionalKernel) break;
      const CoarseGrainingParams params(grid[i], s.hbar);
      labels.push_back(to_string(k));
      t_bars.push_back(grid[i]);
      reports.push_back(t3_coefficient(build_generator(s, k, params)));
    }
  }
  out.write("t3.csv", [&](std::ostream& os) { io::write_t3_csv(os, labels, t_bars, reports); });
}

void write_generator_distances(OutputSet& out, const Scenario& s,
                               const std::vector<Generator>& gens) {
  if (gens.size() < 2 || s.energies.size() > kExponentialMaxDim) return;
  std::vector<GeneratorAudit> audits;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      audits.push_back(generator_distance(gens[i], gens[j]));
  out.write("generator_distance.csv",
            [&](std::ostream& os) { io::write_generator_audit_csv(os, audits); });
}

void write_first_order(OutputSet& out, const Scenario& s) {
  if (!s.projection) return;
  const FirstOrderReport r =
      first_order_check(s.coupling_operator(), build_projection(s), s.initial_state);
  out.write("first_order.csv", [&](std::ostream& os) {
    io::CsvWriter csv(os);
    csv.header({"defect", "threshold", "exceeds_threshold"});
    csv.row({io::format_number(r.defect), io::format_number(r.threshold),
             r.exceeds_threshold ? "1" : "0"});
  });
}

void write_convergence(OutputSet& out, const Scenario& s) {
  if (!s.audit.ladder || s.audit.eps_bar_grid.empty()) return;
  const ConvergenceTable table = fgr_convergence(*s.audit.ladder, s.audit.eps_bar_grid);
  out.write("fgr_convergence.csv",
            [&](std::ostream& os) { io::write_convergence_csv(os, table); });
  out.write("fgr_convergence.ndjson",
            [&](std::ostream& os) { io::write_convergence_ndjson(os, table); });
}

}  // namespace

int exit_code_for(ScenarioErrorKind kind) {
  switch (kind) {
    case ScenarioErrorKind::kSyntax:
      return kExitSyntax;
    case ScenarioErrorKind::kMissingField:
      return kExitMissingField;
    case ScenarioErrorKind::kNotHermitian:
    case ScenarioErrorKind::kInvalidValue:
      return kExitValidation;
  }
  return kExitValidation;
}

Tolerances parse_tolerance_overrides(const std::string& text, Tolerances base) {
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("tolerance override '" + item + "' is not key=value");
    }
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("tolerance override '" + item + "' has no numeric value");
    }
    if (!(value > 0.0)) throw ParameterError("tolerance override '" + item + "' must be positive");
    if (key == "hermiticity") {
      base.hermiticity = value;
    } else if (key == "trace") {
      base.trace = value;
    } else if (key == "positivity") {
      base.positivity = value;
    } else {
      throw ParameterError("unknown tolerance '" + key + "' (hermiticity, trace, positivity)");
    }
  }
  return base;
}

Scenario apply_options(Scenario s, const RunOptions& options) {
  if (options.seed) s.seed = *options.seed;
  if (options.tolerances) {
    s.tolerances = *options.tolerances;
    validate_scenario(s);
  }
  return s;
}

fs::path prepare_output_dir(const fs::path& out_dir, const std::string& name) {
  const fs::path dir = out_dir / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("output directory " + dir.string() + " cannot be created: " +
                  (ec ? ec.message() : std::string("not a directory")));
  }
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f || !(f << "ok") || !f.flush()) {
      throw IoError("output directory " + dir.string() + " is not writable");
    }
  }
  fs::remove(probe, ec);
  return dir;
}

ProjectionScheme build_projection(const Scenario& s) {
  const std::size_t dim = s.energies.size();
  if (!s.projection || s.projection->kind == "trivial") return ProjectionScheme::trivial(dim);
  const ProjectionConfig& p = *s.projection;
  if (p.kind == "block") return block_projection(p.blocks, dim);
  if (p.kind == "partial_trace") {
    return partial_trace_projection(p.system_dim, p.env_dim,
                                    DensityMatrix(p.omega, s.tolerances));
  }
  throw ParameterError("unknown projection kind '" + p.kind + "'");
}

Generator build_generator(const Scenario& s, GeneratorKind kind) {
  return build_generator(s, kind, s.coarse_graining());
}

Generator build_generator(const Scenario& s, GeneratorKind kind,
                          const CoarseGrainingParams& params) {
  const EnergyBasis basis = s.basis();
  const CouplingOperator hprime = s.coupling_operator();
  switch (kind) {
    case GeneratorKind::kGfgr:
      return Generator::gfgr(build_coarse_grained_L(hprime, basis, params), s.free_evolution);
    case GeneratorKind::kConventional:
      return Generator::conventional(
          hprime, completed_collision_kernel(hprime, basis, s.conventional_width(), s.hbar), s.hbar,
          s.free_evolution);
    case GeneratorKind::kConventionalKernel:
      if (!s.elapsed) throw ParameterError("conventional_kernel needs an elapsed time");
      return Generator::conventional(hprime, conventional_kernel(hprime, basis, *s.elapsed, s.hbar),
                                     s.hbar, s.free_evolution);
    case GeneratorKind::kProjected: {
      const CoarseGrainedL L = build_coarse_grained_L(hprime, basis, params);
      return Generator::projected(transition_amplitudes(L, build_projection(s)), L,
                                  s.free_evolution);
    }
  }
  throw ParameterError("unknown generator kind");
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  const Scenario s = apply_options(scenario, options);
  OutputSet out(prepare_output_dir(options.out_dir, s.name), "run", s, options);
  RunResult result;
  std::vector<Generator> built;
  for (GeneratorKind kind : s.generators) {
    GeneratorRun run;
    run.name = to_string(kind);
    try {
      Generator gen = build_generator(s, kind);
      const TrajectoryRecord traj = propagate_master(gen, s.initial_state, s.propagation);
      run.notices = traj.notices;
      run.positivity = positivity_audit(traj, -s.tolerances.positivity);
      if (s.outputs.csv) {
        out.write(run.name + "_trajectory.csv",
                  [&](std::ostream& os) { io::write_trajectory_csv(os, traj); });
      }
      if (s.outputs.ndjson) {
        out.write(run.name + "_trajectory.ndjson",
                  [&](std::ostream& os) { io::write_trajectory_ndjson(os, traj); });
      }
      out.write(run.name + "_positivity.csv", [&](std::ostream& os) {
        io::write_positivity_csv(os, traj, *run.positivity);
      });
      built.push_back(std::move(gen));
    } catch (const IoError&) {
      throw;
    } catch (const NumericalError& e) {
      run.ok = false;
      run.error = e.what();
      result.exit_code = kExitNumerical;
    } catch (const Error& e) {
      run.ok = false;
      run.error = e.what();
      if (result.exit_code == kExitOk) result.exit_code = kExitValidation;
    }
    result.generators.push_back(std::move(run));
  }
  if (s.outputs.rates) write_rates(out, s);
  if (s.outputs.audits) {
    write_t3(out, s);
    write_generator_distances(out, s, built);
    write_first_order(out, s);
    write_convergence(out, s);
  }
  return out.finish(std::move(result));
}

RunResult run_scan(const Scenario& scenario, const RunOptions& options) {
  const Scenario s = apply_options(scenario, options);
  if (!s.oracle || !s.scan) {
    throw ScenarioError({{ScenarioErrorKind::kMissingField, s.oracle ? "scan" : "oracle",
                          "the scan command needs both an oracle and a scan section"}});
  }
  OutputSet out(prepare_output_dir(options.out_dir, s.name), "scan", s, options);
  const ScalingSchedule schedule(s.scan->t_ref, s.scan->xi, s.scan->g_values);
  const ScanReport report = weak_coupling_scan(*s.oracle, schedule);
  out.write("weak_coupling_scan.csv", [&](std::ostream& os) { io::write_scan_csv(os, report); });
  out.manifest()["scan_non_increasing"] = report.non_increasing();
  return out.finish({});
}

RunResult run_audit(const Scenario& scenario, const RunOptions& options) {
  const Scenario s = apply_options(scenario, options);
  OutputSet out(prepare_output_dir(options.out_dir, s.name), "audit", s, options);
  write_t3(out, s);
  write_generator_distances(out, s, build_all(s));
  write_first_order(out, s);
  write_convergence(out, s);
  if (options.witness_trials > 0) {
    WitnessSearchConfig cfg;
    cfg.seed = s.seed;
    cfg.trials = options.witness_trials;
    const auto w = search_positivity_witness(cfg);
    if (w) {
      out.write("positivity-witness.yaml", [&](std::ostream& os) {
        os << serialize_scenario(witness_scenario(*w, s.seed, cfg.t_final, cfg.dt));
      });
      out.manifest()["witness"] = {{"trial", w->trial},
                                   {"min_eigenvalue", w->min_eigenvalue},
                                   {"eta", w->eta}};
    } else {
      out.manifest()["witness"] = nullptr;
    }
  }
  return out.finish({});
}

RunResult run_rates(const Scenario& scenario, const RunOptions& options) {
  const Scenario s = apply_options(scenario, options);
  if (s.energies.size() > kRateTensorMaxDim) {
    throw ScenarioError({{ScenarioErrorKind::kInvalidValue, "basis.energies",
                          "rate tensors are limited to dimension " +
                              std::to_string(kRateTensorMaxDim)}});
  }
  OutputSet out(prepare_output_dir(options.out_dir, s.name), "rates", s, options);
  write_rates(out, s);
  return out.finish({});
}

Scenario witness_scenario(const WitnessCandidate& w, std::uint64_t seed, double t_final,
                          double dt) {
  Scenario s;
  s.name = "positivity-witness";
  s.seed = seed;
  s.energies = w.energies;
  s.coupling = w.coupling;
  s.g = 1.0;
  s.t_bar = s.hbar / w.eta;
  s.eta = w.eta;
  s.generators = {GeneratorKind::kConventional, GeneratorKind::kGfgr};
  s.initial_state = w.rho0;
  s.propagation.t_final = t_final;
  s.propagation.dt = dt;
  s.propagation.method = Method::kExactExponential;
  validate_scenario(s);
  return s;
}

}  // namespace gfgr
