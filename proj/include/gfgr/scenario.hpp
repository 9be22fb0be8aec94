#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gfgr/core.hpp"
#include "gfgr/diagnostics.hpp"
#include "gfgr/evolve.hpp"

namespace gfgr {

// Problems found while loading a scenario, ordered by severity. Each maps to
// its own process exit code (see exit_code_for).
enum class ScenarioErrorKind { kInvalidValue, kNotHermitian, kMissingField, kSyntax };

struct ScenarioDiagnostic {
  ScenarioErrorKind kind;
  std::string path;  // e.g. "coupling.matrix[0][1]"
  std::string reason;
};

class ScenarioError : public ValidationError {
 public:
  explicit ScenarioError(std::vector<ScenarioDiagnostic> diagnostics);

  const std::vector<ScenarioDiagnostic>& diagnostics() const { return diagnostics_; }
  // Most severe kind present.
  ScenarioErrorKind kind() const { return kind_; }

 private:
  std::vector<ScenarioDiagnostic> diagnostics_;
  ScenarioErrorKind kind_;
};

enum class GeneratorKind { kGfgr, kConventional, kConventionalKernel, kProjected };

std::string to_string(GeneratorKind kind);
std::string to_string(Method method);

struct ProjectionConfig {
  std::string kind;  // block | partial_trace | trivial
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t system_dim = 0;
  std::size_t env_dim = 0;
  Matrix omega;
};

struct ScanConfig {
  double t_ref = 1.0;
  double xi = 1.0;
  std::vector<double> g_values;
};

struct AuditConfig {
  std::vector<double> t_bar_grid;
  std::optional<LadderScenario> ladder;
  std::vector<double> eps_bar_grid;
};

struct OutputConfig {
  bool csv = true;
  bool ndjson = true;
  bool rates = true;
  bool audits = true;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  double hbar = 1.0;
  std::vector<double> energies;
  Matrix coupling;
  double g = 1.0;
  // exactly one of the two is set
  std::optional<double> t_bar;
  std::optional<double> eps_bar;
  std::vector<GeneratorKind> generators;
  std::optional<double> eta;
  std::optional<double> elapsed;
  bool free_evolution = true;
  Matrix initial_state;
  std::optional<ProjectionConfig> projection;
  PropagationSpec propagation;
  std::optional<BipartiteFixture> oracle;
  std::optional<ScanConfig> scan;
  AuditConfig audit;
  OutputConfig outputs;
  Tolerances tolerances;

  CoarseGrainingParams coarse_graining() const;
  EnergyBasis basis() const { return EnergyBasis(energies); }
  CouplingOperator coupling_operator() const { return CouplingOperator(coupling, g); }
  // eta if given, otherwise eps_bar of the GFGR parameters.
  double conventional_width() const;
};

bool operator==(const Scenario& a, const Scenario& b);

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);

// Checks the cross-field invariants (dimensions, Hermiticity, state validity).
// Called by the parsers; exposed for scenarios built in code.
void validate_scenario(const Scenario& s);

}  // namespace gfgr
