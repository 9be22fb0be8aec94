#include "gfgr/core.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace gfgr {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

double hermiticity_defect(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

RealVector hermitian_eigenvalues(const Matrix& a) {
  const Matrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("hermitian_eigenvalues: eigensolver did not converge");
  }
  return es.eigenvalues();
}

EnergyBasis::EnergyBasis(std::vector<double> energies, std::vector<std::string> labels)
    : energies_(std::move(energies)), labels_(std::move(labels)) {
  if (energies_.empty()) throw ValidationError("EnergyBasis: dim must be >= 1");
  for (double e : energies_) {
    if (!std::isfinite(e)) throw ValidationError("EnergyBasis: energies must be finite");
  }
  if (labels_.empty()) {
    labels_.reserve(energies_.size());
    for (std::size_t i = 0; i < energies_.size(); ++i) labels_.push_back(std::to_string(i));
  } else if (labels_.size() != energies_.size()) {
    throw ValidationError("EnergyBasis: labels and energies differ in length");
  }
}

Matrix Diagonalization::to_energy_basis(const Matrix& op) const {
  require_same_dim(static_cast<std::size_t>(op.rows()), basis.dim(), "to_energy_basis");
  return eigenvectors.adjoint() * op * eigenvectors;
}

Diagonalization diagonalize_hamiltonian(const Matrix& h0, double hermiticity_tol) {
  require_square(h0, "diagonalize_hamiltonian");
  if (hermiticity_defect(h0) > hermiticity_tol) {
    throw ValidationError("diagonalize_hamiltonian: H0 not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h0 + h0.adjoint()));
  if (es.info() != Eigen::Success) {
    throw NumericalError("diagonalize_hamiltonian: eigensolver did not converge");
  }
  const RealVector& w = es.eigenvalues();
  return Diagonalization{EnergyBasis(std::vector<double>(w.data(), w.data() + w.size())),
                         es.eigenvectors()};
}

DensityMatrix::DensityMatrix(Matrix rho, const Tolerances& tol,
                             std::optional<Factorization> factors)
    : rho_(std::move(rho)), factors_(factors) {
  require_square(rho_, "DensityMatrix");
  const ValidationReport r = validate_state(rho_, tol);
  if (!r.hermitian) {
    throw ValidationError("DensityMatrix: not Hermitian (defect " +
                          fmt_double(r.hermiticity_defect) + ")");
  }
  if (!r.unit_trace) {
    throw ValidationError("DensityMatrix: trace differs from 1 by " + fmt_double(r.trace_defect));
  }
  if (!r.positive) {
    throw ValidationError("DensityMatrix: negative eigenvalue " + fmt_double(r.min_eigenvalue));
  }
  if (factors_ && factors_->dim_a * factors_->dim_b != dim()) {
    throw DimensionError("DensityMatrix: factorization does not match dimension");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw ValidationError("DensityMatrix::pure: zero vector");
  const ComplexVector v = psi / norm;
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("DensityMatrix::basis_state: index out of range");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m = Matrix::Zero(n, n);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::with_factors(Factorization f) const {
  if (f.dim_a * f.dim_b != dim()) {
    throw DimensionError("DensityMatrix::with_factors: factorization does not match dimension");
  }
  DensityMatrix copy = *this;
  copy.factors_ = f;
  return copy;
}

CouplingOperator::CouplingOperator(Matrix matrix, double coupling_scale, double hermiticity_tol)
    : matrix_(std::move(matrix)), g_(coupling_scale) {
  require_square(matrix_, "CouplingOperator");
  if (!(g_ >= 0.0) || !std::isfinite(g_)) {
    throw ParameterError("CouplingOperator: coupling scale must be finite and >= 0");
  }
  const double defect = hermiticity_defect(matrix_);
  if (defect > hermiticity_tol) {
    throw ValidationError("CouplingOperator: coupling not Hermitian (defect " +
                          fmt_double(defect) + ")");
  }
}

CoarseGrainingParams::CoarseGrainingParams(double t_bar, double hbar)
    : t_bar_(t_bar), hbar_(hbar) {
  if (!(t_bar > 0.0) || !std::isfinite(t_bar)) {
    throw ParameterError("CoarseGrainingParams: t_bar must be positive and finite");
  }
  if (!(hbar > 0.0) || !std::isfinite(hbar)) {
    throw ParameterError("CoarseGrainingParams: hbar must be positive and finite");
  }
}

CoarseGrainingParams CoarseGrainingParams::from_eps_bar(double eps_bar, double hbar) {
  if (!(eps_bar > 0.0)) throw ParameterError("CoarseGrainingParams: eps_bar must be positive");
  return CoarseGrainingParams(hbar / eps_bar, hbar);
}

ScalingSchedule::ScalingSchedule(double t_ref, double xi, std::vector<double> g_values)
    : t_ref_(t_ref), xi_(xi), g_values_(std::move(g_values)) {
  if (!(t_ref > 0.0)) throw ParameterError("ScalingSchedule: T_ref must be positive");
  if (!(xi > 0.0)) throw ParameterError("ScalingSchedule: xi must be positive");
  if (g_values_.empty()) throw ParameterError("ScalingSchedule: no coupling values");
  for (std::size_t i = 0; i < g_values_.size(); ++i) {
    if (!(g_values_[i] > 0.0)) throw ParameterError("ScalingSchedule: g values must be > 0");
    if (i > 0 && !(g_values_[i] < g_values_[i - 1])) {
      throw ParameterError("ScalingSchedule: g values must be strictly decreasing");
    }
  }
}

double ScalingSchedule::t_bar_for(double g) const { return t_ref_ * std::pow(g, -xi_); }

Matrix tensor_product(const Matrix& a, const Matrix& b, std::size_t dimension_cap) {
  const auto rows = static_cast<std::size_t>(a.rows() * b.rows());
  const auto cols = static_cast<std::size_t>(a.cols() * b.cols());
  if (rows > dimension_cap || cols > dimension_cap) {
    throw DimensionError("tensor_product: result dimension " + std::to_string(rows) +
                         " exceeds cap " + std::to_string(dimension_cap));
  }
  return Eigen::kroneckerProduct(a, b).eval();
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                             std::size_t dimension_cap) {
  Matrix m = tensor_product(a.matrix(), b.matrix(), dimension_cap);
  // Product of two valid states is valid; allow for accumulated rounding.
  Tolerances tol;
  tol.trace = 1e-11;
  tol.hermiticity = 1e-11;
  return DensityMatrix(std::move(m), tol, Factorization{a.dim(), b.dim()});
}

Matrix partial_trace(const Matrix& rho, Factorization f, Factor keep) {
  require_square(rho, "partial_trace");
  require_same_dim(static_cast<std::size_t>(rho.rows()), f.dim_a * f.dim_b, "partial_trace");
  const auto da = static_cast<Eigen::Index>(f.dim_a);
  const auto db = static_cast<Eigen::Index>(f.dim_b);
  if (keep == Factor::kFirst) {
    Matrix out = Matrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j)
        for (Eigen::Index k = 0; k < db; ++k) out(i, j) += rho(i * db + k, j * db + k);
    return out;
  }
  Matrix out = Matrix::Zero(db, db);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k) out(i, j) += rho(k * db + i, k * db + j);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Factor keep) {
  if (!rho.factors()) {
    throw DimensionError("partial_trace: state is not declared bipartite");
  }
  Tolerances tol;
  tol.trace = 1e-11;
  tol.hermiticity = 1e-11;
  return DensityMatrix(partial_trace(rho.matrix(), *rho.factors(), keep), tol);
}

Matrix interaction_picture(const CouplingOperator& op, const EnergyBasis& basis, double t,
                           double hbar) {
  require_same_dim(op.dim(), basis.dim(), "interaction_picture");
  const Matrix h = op.scaled();
  const auto n = h.rows();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double phase = basis.gap(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                           t / hbar;
      out(i, j) = h(i, j) * std::polar(1.0, phase);
    }
  }
  return out;
}

ValidationReport validate_state(const Matrix& rho, const Tolerances& tol) {
  require_square(rho, "validate_state");
  ValidationReport r;
  r.hermiticity_defect = hermiticity_defect(rho);
  r.trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  r.min_eigenvalue = hermitian_eigenvalues(rho).minCoeff();
  r.hermitian = r.hermiticity_defect <= tol.hermiticity;
  r.unit_trace = r.trace_defect <= tol.trace;
  r.positive = r.min_eigenvalue >= -tol.positivity;
  return r;
}

}  // namespace gfgr
