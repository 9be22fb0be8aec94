#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gfgr/core.hpp"
#include "gfgr/superop.hpp"

namespace gfgr {

enum class ProjectionKind { kPartialTrace, kBlock, kCustom };

// Completely positive projection P0 A = sum_a V_a^dagger A V_a (Heisenberg
// picture) given by its Kraus family. Construction rejects families that are
// incomplete or not idempotent.
class ProjectionScheme {
 public:
  ProjectionScheme(std::vector<Matrix> kraus_ops, ProjectionKind kind,
                   std::optional<Matrix> environment_state = std::nullopt);

  // Single V = 1.
  static ProjectionScheme trivial(std::size_t dim);

  std::size_t dim() const { return dim_; }
  ProjectionKind kind() const { return kind_; }
  const std::vector<Matrix>& kraus_ops() const { return kraus_; }
  const std::optional<Matrix>& environment_state() const { return omega_; }

  // sum_a V_a^dagger A V_a
  Matrix apply_to_observable(const Matrix& a) const;
  // sum_a V_a rho V_a^dagger (dual, acts on states)
  Matrix apply_to_state(const Matrix& rho) const;

 private:
  std::vector<Matrix> kraus_;
  ProjectionKind kind_;
  std::optional<Matrix> omega_;
  std::size_t dim_;
};

// Orthogonal block projectors {P, Q_l, Q_r, ...}. `blocks` must partition
// {0, ..., dim-1}.
ProjectionScheme block_projection(const std::vector<std::vector<std::size_t>>& blocks,
                                  std::size_t dim);

// Conditional expectation A (x) B -> Tr(omega B) A (x) 1. With omega = sum_k
// p_k |k><k|, the Kraus operators are sqrt(p_k) (1 (x) |k><j|) over all
// environment basis vectors |j> and every k with p_k > 0.
ProjectionScheme partial_trace_projection(std::size_t system_dim, std::size_t env_dim,
                                          const DensityMatrix& omega);

struct FirstOrderReport {
  // spectral norm of P0([H', P0 rho])
  double defect = 0.0;
  double threshold = 0.0;
  bool exceeds_threshold = false;
};

// Checks the no-first-order condition P0([H', P0 rho]) = 0 with P0 acting on
// states. Threshold is `relative_threshold` times the spectral norm of H'.
FirstOrderReport first_order_check(const CouplingOperator& hprime, const ProjectionScheme& scheme,
                                   const Matrix& rho, double relative_threshold = 1e-10);

// D_{ab} = V_a L V_b, stored row-major in (a, b).
struct TransitionAmplitudes {
  std::vector<Matrix> ops;
  std::size_t kraus_count = 0;
  double t_bar = 0.0;

  const Matrix& at(std::size_t a, std::size_t b) const { return ops[a * kraus_count + b]; }
  std::size_t dim() const { return ops.empty() ? 0 : static_cast<std::size_t>(ops[0].rows()); }
};

TransitionAmplitudes transition_amplitudes(const CoarseGrainedL& lindblad,
                                           const ProjectionScheme& scheme);

// d rho / dT = sum_ab D rho D^dagger - 1/2 {D^dagger D, rho}
Matrix projected_generator_apply(const TransitionAmplitudes& amplitudes, const Matrix& rho);

}  // namespace gfgr
