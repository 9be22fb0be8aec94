#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gfgr/core.hpp"

namespace gfgr {

// Rank-4 tensors are only materialized up to this dimension (dim^4 storage).
inline constexpr std::size_t kRateTensorMaxDim = 16;

// Normalized Gaussian exp(-x^2 / (2 w^2)) / (sqrt(2 pi) w); the regularized
// energy delta used by the completed-collision rates.
double gaussian_delta(double x, double width);

// Hermitian Lindblad operator of the coarse-grained dynamics,
//
//   L_{ll'} = (2 pi t_bar^2)^(1/4) (H'_{ll'} / hbar) exp(-(eps_l - eps_l')^2 t_bar^2 / (4 hbar^2)),
//
// the closed form of the Gaussian-weighted time integral of H'(t) in the
// interaction picture. Units are time^(-1/2). `coupling` keeps g * H' so the
// rate tensor can be rebuilt independently of `matrix`.
struct CoarseGrainedL {
  Matrix matrix;
  Matrix coupling;
  CoarseGrainingParams params;
  EnergyBasis basis;

  std::size_t dim() const { return basis.dim(); }
};

CoarseGrainedL build_coarse_grained_L(const CouplingOperator& hprime, const EnergyBasis& basis,
                                      const CoarseGrainingParams& params);

// d rho / dT = -1/2 [L, [L, rho]]
Matrix gfgr_apply(const CoarseGrainedL& lindblad, const Matrix& rho);

enum class RateKind { kConventional, kGfgr };

// P_{l1 l2, l1' l2'} in time^-1, indexed (l1, l2, l1p, l2p).
class RateTensor {
 public:
  RateTensor(std::size_t dim, RateKind kind);

  std::size_t dim() const { return dim_; }
  RateKind kind() const { return kind_; }

  Complex& operator()(std::size_t l1, std::size_t l2, std::size_t l1p, std::size_t l2p) {
    return entries_[index(l1, l2, l1p, l2p)];
  }
  const Complex& operator()(std::size_t l1, std::size_t l2, std::size_t l1p,
                            std::size_t l2p) const {
    return entries_[index(l1, l2, l1p, l2p)];
  }

  const std::vector<Complex>& entries() const { return entries_; }

 private:
  std::size_t index(std::size_t l1, std::size_t l2, std::size_t l1p, std::size_t l2p) const {
    return ((l1 * dim_ + l2) * dim_ + l1p) * dim_ + l2p;
  }

  std::size_t dim_;
  RateKind kind_;
  std::vector<Complex> entries_;
};

// Symmetrized quantum scattering rates
//
//   P = (2 pi / hbar) H'_{l1 l1'} conj(H'_{l2 l2'}) / (sqrt(2 pi) eps_bar)
//       * exp(-[(eps_l1 - eps_l1')^2 + (eps_l2 - eps_l2')^2] / (4 eps_bar^2)),
//
// evaluated from the coupling directly, not from the product of L entries.
RateTensor gfgr_rate_tensor(const CouplingOperator& hprime, const EnergyBasis& basis,
                            const CoarseGrainingParams& params);
RateTensor gfgr_rate_tensor(const CoarseGrainedL& lindblad);

// Completed-collision conventional rates with a single energy delta on the
// second index pair. Not symmetric under 1 <-> 2.
RateTensor conventional_rate_tensor(const CouplingOperator& hprime, const EnergyBasis& basis,
                                    double eta, double hbar = 1.0);

// Equation of motion assembled from a rate tensor:
//
//   d rho_{12} = 1/2 sum_{1'2'} [P_{12,1'2'} rho_{1'2'} - P_{12',1'1'} rho_{2'2}] + H.c.
//
// The H.c. half is written out linearly so the map is defined on any matrix;
// it coincides with X + X^dagger whenever rho is Hermitian.
Matrix rate_tensor_apply(const RateTensor& rates, const Matrix& rho);

enum class Smoothing { kDelta, kGaussian };

// Diagonal rates P_{l l'} (time^-1), nonnegative.
struct SemiclassicalRates {
  RealMatrix rates;
  Smoothing smoothing = Smoothing::kGaussian;
  // eta for kDelta, eps_bar for kGaussian
  double width = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(rates.rows()); }
};

// (2 pi / hbar) |H'|^2 exp(-gap^2 / (2 eps_bar^2)) / (sqrt(2 pi) eps_bar) == |L_{ll'}|^2
SemiclassicalRates smoothed_fgr_rates(const CouplingOperator& hprime, const EnergyBasis& basis,
                                      const CoarseGrainingParams& params);

// (2 pi / hbar) |H'|^2 delta_eta(gap)
SemiclassicalRates fgr_rates(const CouplingOperator& hprime, const EnergyBasis& basis, double eta,
                             double hbar = 1.0);

// P_{ll'} = tensor(l, l, l', l'); the semiclassical diagonal selection.
SemiclassicalRates diagonal_rates(const RateTensor& tensor, Smoothing smoothing, double width);

// df_l/dt = sum_l' [P_{ll'} f_l' - P_{l'l} f_l]. Rejects f with entries below
// -tol or a sum off 1 by more than tol.
RealVector boltzmann_rhs(const SemiclassicalRates& rates, const RealVector& f, double tol = 1e-12);

// Kernel K of the conventional Markov generator. For finite `elapsed`:
//
//   K_{ll'} = 2 (H'_{ll'} / hbar) * integral_{-elapsed}^{0} exp(i gap s / hbar) ds,
//
// evaluated in closed form. The completed-collision kernel keeps only the
// energy-conserving part, K = 2 pi H' delta_eta(gap); then `elapsed` is +inf
// and `eta` is set.
struct ConventionalKernel {
  Matrix matrix;
  double elapsed;
  std::optional<double> eta;
  EnergyBasis basis;
};

ConventionalKernel conventional_kernel(const CouplingOperator& hprime, const EnergyBasis& basis,
                                       double elapsed, double hbar = 1.0);
ConventionalKernel completed_collision_kernel(const CouplingOperator& hprime,
                                              const EnergyBasis& basis, double eta,
                                              double hbar = 1.0);

// d rho / dt = -1/2 [H'/hbar, [K, rho]]
Matrix conventional_apply(const CouplingOperator& hprime, const ConventionalKernel& kernel,
                          const Matrix& rho, double hbar = 1.0);

}  // namespace gfgr
