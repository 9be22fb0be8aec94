#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gfgr/diagnostics.hpp"
#include "gfgr/evolve.hpp"
#include "gfgr/projection.hpp"
#include "gfgr/scenario.hpp"

namespace gfgr {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitIo = 4,
  kExitSyntax = 5,
  kExitMissingField = 6,
};

int exit_code_for(ScenarioErrorKind kind);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<Tolerances> tolerances;
  // Bytes of the scenario file, hashed into the manifest. Falls back to the
  // canonical serialization when absent.
  std::optional<std::string> source_text;
  // witness search trials for the audit command (0 = skip)
  std::size_t witness_trials = 0;
};

// "hermiticity=1e-10,trace=1e-12,positivity=1e-9" applied on top of `base`.
Tolerances parse_tolerance_overrides(const std::string& text, Tolerances base = {});

// Applies --seed / --tol-overrides and revalidates.
Scenario apply_options(Scenario s, const RunOptions& options);

struct GeneratorRun {
  std::string name;
  bool ok = true;
  std::string error;
  std::vector<std::string> notices;
  std::optional<PositivityAudit> positivity;
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path directory;
  std::vector<GeneratorRun> generators;
  // relative to `directory`, in write order; manifest.json excluded
  std::vector<std::string> files;
};

// Creates <out_dir>/<name> and proves it writable; throws IoError otherwise.
std::filesystem::path prepare_output_dir(const std::filesystem::path& out_dir,
                                         const std::string& name);

ProjectionScheme build_projection(const Scenario& s);
Generator build_generator(const Scenario& s, GeneratorKind kind);
Generator build_generator(const Scenario& s, GeneratorKind kind, const CoarseGrainingParams& params);

// Subcommands. Each writes into its own scenario directory and finishes with
// manifest.json.
RunResult run_scenario(const Scenario& s, const RunOptions& options);
RunResult run_scan(const Scenario& s, const RunOptions& options);
RunResult run_audit(const Scenario& s, const RunOptions& options);
RunResult run_rates(const Scenario& s, const RunOptions& options);

// Scenario reproducing a witness candidate under both the conventional and
// GFGR generators (t_bar = hbar / eta).
Scenario witness_scenario(const WitnessCandidate& w, std::uint64_t seed, double t_final, double dt);

}  // namespace gfgr
