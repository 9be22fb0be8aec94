#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfgr/errors.hpp"

namespace gfgr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Largest Hilbert-space dimension accepted by tensor products and the
// bipartite oracles.
inline constexpr std::size_t kDefaultDimensionCap = 4096;

struct Tolerances {
  double hermiticity = 1e-12;
  double trace = 1e-12;
  double positivity = 1e-10;
};

// Eigenbasis {|lambda>} of the noninteracting Hamiltonian, stored as its
// eigenvalue list. Degenerate levels are allowed.
class EnergyBasis {
 public:
  explicit EnergyBasis(std::vector<double> energies,
                       std::vector<std::string> labels = {});

  std::size_t dim() const { return energies_.size(); }
  const std::vector<double>& energies() const { return energies_; }
  double energy(std::size_t i) const { return energies_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  // eps_i - eps_j
  double gap(std::size_t i, std::size_t j) const {
    return energies_[i] - energies_[j];
  }

  bool operator==(const EnergyBasis&) const = default;

 private:
  std::vector<double> energies_;
  std::vector<std::string> labels_;
};

// An arbitrary Hermitian H0 brought into its eigenbasis once at ingestion.
// Columns of `eigenvectors` are the |lambda> in the original frame.
struct Diagonalization {
  EnergyBasis basis;
  Matrix eigenvectors;

  // Rewrites an operator given in the original frame into the energy basis.
  Matrix to_energy_basis(const Matrix& op) const;
};

Diagonalization diagonalize_hamiltonian(const Matrix& h0,
                                        double hermiticity_tol = 1e-12);

// Split of a space into two tensor factors, first (A) and second (B).
struct Factorization {
  std::size_t dim_a = 1;
  std::size_t dim_b = 1;
  bool operator==(const Factorization&) const = default;
};

enum class Factor { kFirst, kSecond };

// Hermitian, unit-trace, positive-semidefinite state.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho, const Tolerances& tol = {},
                         std::optional<Factorization> factors = std::nullopt);

  static DensityMatrix maximally_mixed(std::size_t dim);
  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix basis_state(std::size_t dim, std::size_t index);

  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }
  const std::optional<Factorization>& factors() const { return factors_; }

  DensityMatrix with_factors(Factorization f) const;

 private:
  Matrix rho_;
  std::optional<Factorization> factors_;
};

// Hermitian perturbation H' in the energy basis, multiplied by g on use.
class CouplingOperator {
 public:
  explicit CouplingOperator(Matrix matrix, double coupling_scale = 1.0,
                            double hermiticity_tol = 1e-12);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  double coupling_scale() const { return g_; }
  // g * H'
  Matrix scaled() const { return g_ * matrix_; }

  CouplingOperator with_scale(double g) const {
    return CouplingOperator(matrix_, g);
  }

 private:
  Matrix matrix_;
  double g_;
};

// Correlation time t_bar and the derived energy width eps_bar = hbar/t_bar.
class CoarseGrainingParams {
 public:
  explicit CoarseGrainingParams(double t_bar, double hbar = 1.0);
  static CoarseGrainingParams from_eps_bar(double eps_bar, double hbar = 1.0);

  double t_bar() const { return t_bar_; }
  double hbar() const { return hbar_; }
  double eps_bar() const { return hbar_ / t_bar_; }

  bool operator==(const CoarseGrainingParams&) const = default;

 private:
  double t_bar_;
  double hbar_;
};

// t_bar(g) = T_ref * g^(-xi) for a decreasing list of couplings.
class ScalingSchedule {
 public:
  ScalingSchedule(double t_ref, double xi, std::vector<double> g_values);

  double t_ref() const { return t_ref_; }
  double xi() const { return xi_; }
  const std::vector<double>& g_values() const { return g_values_; }
  double t_bar_for(double g) const;

 private:
  double t_ref_;
  double xi_;
  std::vector<double> g_values_;
};

Matrix tensor_product(const Matrix& a, const Matrix& b,
                      std::size_t dimension_cap = kDefaultDimensionCap);

// Product state; the result is declared bipartite.
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                             std::size_t dimension_cap = kDefaultDimensionCap);

// Partial trace of a matrix on a declared bipartite space. The factor named by
// `keep` survives.
Matrix partial_trace(const Matrix& rho, Factorization factors, Factor keep);
DensityMatrix partial_trace(const DensityMatrix& rho, Factor keep);

// H'_{ll'} exp(i (eps_l - eps_l') t / hbar)
Matrix interaction_picture(const CouplingOperator& op, const EnergyBasis& basis,
                           double t, double hbar = 1.0);

struct ValidationReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;
  bool hermitian = false;
  bool unit_trace = false;
  bool positive = false;
  bool passed() const { return hermitian && unit_trace && positive; }
};

ValidationReport validate_state(const Matrix& rho, const Tolerances& tol = {});

// Entrywise max |A - A^dagger|.
double hermiticity_defect(const Matrix& a);

// Eigenvalues (ascending) of the Hermitian part of `a`.
RealVector hermitian_eigenvalues(const Matrix& a);

void require_square(const Matrix& a, const char* what);
void require_same_dim(std::size_t a, std::size_t b, const char* what);

}  // namespace gfgr
