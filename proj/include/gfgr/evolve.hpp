#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gfgr/core.hpp"
#include "gfgr/projection.hpp"
#include "gfgr/superop.hpp"

namespace gfgr {

enum class Method { kAuto, kExactExponential, kRk4, kAdaptive };

// Liouvillians above this dimension are never exponentiated.
inline constexpr std::size_t kExponentialMaxDim = 32;
// kAuto picks the exponential up to this dimension, rk4 with dt = t_bar/100 above.
inline constexpr std::size_t kAutoExponentialMaxDim = 8;

struct PropagationSpec {
  double t_final = 1.0;
  double dt = 0.01;
  Method method = Method::kAuto;
  std::size_t record_every = 1;
  // Adaptive stepping tolerances.
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;

  void validate() const;
  // Snapshot times: multiples of dt * record_every, plus t_final if it is not
  // already on that grid. Always starts at 0.
  std::vector<double> snapshot_times() const;
};

struct SnapshotDiagnostics {
  double trace = 0.0;
  double min_eigenvalue = 0.0;
  double entropy = 0.0;
  double purity = 0.0;
};

SnapshotDiagnostics diagnose(const Matrix& rho);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<SnapshotDiagnostics> diagnostics;
  std::vector<std::string> notices;

  void push(double t, Matrix rho);
  std::size_t size() const { return times.size(); }
};

// A dissipative generator, optionally with the free evolution
// -(i/hbar)[H0, rho] of the energy basis added.
class Generator {
 public:
  struct Gfgr {
    CoarseGrainedL lindblad;
  };
  struct Conventional {
    CouplingOperator coupling;
    ConventionalKernel kernel;
  };
  struct Projected {
    TransitionAmplitudes amplitudes;
  };
  using Part = std::variant<Gfgr, Conventional, Projected>;

  static Generator gfgr(CoarseGrainedL lindblad, bool free_evolution = false);
  static Generator conventional(CouplingOperator coupling, ConventionalKernel kernel, double hbar,
                                bool free_evolution = false);
  static Generator projected(TransitionAmplitudes amplitudes, const CoarseGrainedL& lindblad,
                             bool free_evolution = false);

  std::size_t dim() const { return basis_.dim(); }
  const EnergyBasis& basis() const { return basis_; }
  double hbar() const { return hbar_; }
  bool free_evolution() const { return free_evolution_; }
  const Part& part() const { return part_; }
  std::string name() const;

  // Direct application to a matrix.
  Matrix apply(const Matrix& rho) const;
  // dim^2 x dim^2 superoperator matrix, column-stacking convention.
  Matrix liouvillian() const;

 private:
  Generator(Part part, EnergyBasis basis, double hbar, bool free_evolution);

  Part part_;
  EnergyBasis basis_;
  double hbar_;
  bool free_evolution_;
};

// rho(t) = U rho0 U^dagger, U = exp(-i H t / hbar) from an eigendecomposition.
TrajectoryRecord exact_trajectory(const Matrix& h_total, const DensityMatrix& rho0,
                                  const PropagationSpec& spec, double hbar = 1.0);

// Exact evolution of rho_sys (x) omega0 under H_sys (x) 1 + 1 (x) H_env + H_int,
// recorded as the reduced system state.
TrajectoryRecord reduced_reference_trajectory(const Matrix& h_sys, const Matrix& h_env,
                                              const Matrix& h_int, const DensityMatrix& omega0,
                                              const DensityMatrix& rho0_sys,
                                              const PropagationSpec& spec, double hbar = 1.0,
                                              std::size_t dimension_cap = kDefaultDimensionCap);

TrajectoryRecord propagate_master(const Generator& generator, const Matrix& rho0,
                                  const PropagationSpec& spec);

// Spin/system coupled to a finite environment; all energies refer to the
// product basis |s> (x) |e>.
struct BipartiteFixture {
  std::vector<double> system_energies;
  std::vector<double> environment_energies;
  // unit-strength interaction on the product space, scaled by g per row
  Matrix interaction;
  Matrix omega0;
  Matrix rho0_system;
  double hbar = 1.0;
  // final time on the rescaled clock tau = t g^2
  double tau_final = 4.0;
  std::size_t snapshots = 80;
};

struct ScanRow {
  double g = 0.0;
  double t_bar = 0.0;
  // max over snapshots of the trace distance on the tau = t g^2 clock
  double distance_rescaled = 0.0;
  // same, with snapshots at t = tau (no rescaling)
  double distance_unscaled = 0.0;
};

struct ScanReport {
  double t_ref = 0.0;
  double xi = 0.0;
  std::vector<ScanRow> rows;
  bool non_increasing() const;
};

// One scan row with an explicit correlation time. g = 0 reduces both sides to
// free evolution.
ScanRow weak_coupling_row(const BipartiteFixture& fixture, double g, double t_bar);

ScanReport weak_coupling_scan(const BipartiteFixture& fixture, const ScalingSchedule& schedule);

}  // namespace gfgr
