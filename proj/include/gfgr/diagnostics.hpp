#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfgr/evolve.hpp"

namespace gfgr {

struct PositivityAudit {
  std::vector<double> min_eigenvalues;
  double global_min = 0.0;
  std::optional<double> first_violation_time;
  double threshold = -1e-10;

  bool violated() const { return first_violation_time.has_value(); }
};

PositivityAudit positivity_audit(const TrajectoryRecord& traj, double threshold = -1e-10);

// Two-level generator in the coordinates (p, x, y, s) with p = rho00 - rho11,
// x + i y = rho01, s = tr rho. The trace coordinate is conserved and dropped
// from the T3 blocks, which couple p to (x, y).
struct T3Report {
  Eigen::Matrix4d coordinates;
  double population_from_coherence = 0.0;  // |M(p, {x, y})|
  double coherence_from_population = 0.0;  // |M({x, y}, p)|
  double t3_norm = 0.0;                    // Frobenius norm of both blocks
  double t1_rate = 0.0;                    // -M(p, p)
  double t2_rate = 0.0;                    // -(M(x, x) + M(y, y)) / 2
};

T3Report t3_coefficient(const Generator& generator);

struct GeneratorAudit {
  std::string kind_a;
  std::string kind_b;
  double spectral_distance = 0.0;
  double frobenius_distance = 0.0;
  // Spectral norms of the Liouvillian difference restricted to
  // (output sector, input sector).
  double population_from_population = 0.0;
  double population_from_coherence = 0.0;
  double coherence_from_population = 0.0;
  double coherence_from_coherence = 0.0;
};

GeneratorAudit generator_distance(const Generator& a, const Generator& b);

// Quasi-continuum: `levels` equally spaced energies (spacing delta) with a
// uniform coupling magnitude between every pair.
struct LadderScenario {
  std::size_t levels = 201;
  double spacing = 0.01;
  double coupling = 0.05;
  double hbar = 1.0;
  // defaults to the middle level
  std::optional<std::size_t> probe;

  double bandwidth() const { return spacing * static_cast<double>(levels - 1); }
};

struct ConvergenceRow {
  double eps_bar = 0.0;
  double spacing = 0.0;
  double bandwidth = 0.0;
  // sum over all l' of P_{probe, l'}
  double total_rate = 0.0;
  // same sum without the l' = probe term
  double out_rate_excluding_self = 0.0;
  // (2 pi / hbar) |H'|^2 / delta
  double golden_rule_rate = 0.0;
  // NaN when the golden-rule rate vanishes
  double relative_error = 0.0;
  double relative_error_excluding_self = 0.0;
  bool error_defined = true;
  bool scale_separated = false;
  // eps_bar at or below the level spacing
  bool resolves_discreteness = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  // relative_error is monotone along the eps_bar grid
  bool monotone = true;
};

// Scale separation means delta / eps_bar <= ratio and eps_bar / (W/2) <= ratio.
ConvergenceTable fgr_convergence(const LadderScenario& ladder, const std::vector<double>& eps_bars,
                                 double separation_ratio = 0.2);

// Relative error |sum_l' P_{probe,l'} - golden| / golden for one eps_bar,
// summed in 100-digit binary floating point. In the scale-separated regime the
// error falls far below double rounding, so comparisons between ladders need
// this path.
double convergence_error_extended(const LadderScenario& ladder, double eps_bar);

struct WitnessSearchConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 200;
  double t_final = 5.0;
  double dt = 0.05;
  // Trajectories whose spectrum leaves [-bound, bound] are unstable rather
  // than merely non-positive and are skipped.
  double spectrum_bound = 1.0;
};

struct WitnessCandidate {
  std::vector<double> energies;
  Matrix coupling;
  double eta = 0.0;
  Matrix rho0;
  double min_eigenvalue = 0.0;
  std::optional<double> first_violation_time;
  std::size_t trial = 0;
};

// Random 2- and 3-level couplings, widths eta and pure initial states under the
// completed-collision conventional generator (with free evolution). Returns the
// candidate with the most negative trajectory eigenvalue.
std::optional<WitnessCandidate> search_positivity_witness(const WitnessSearchConfig& config);

}  // namespace gfgr
