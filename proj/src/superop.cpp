#include "gfgr/superop.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gfgr {

namespace {

void require_tensor_dim(std::size_t dim) {
  if (dim > kRateTensorMaxDim) {
    throw DimensionError("rate tensors are limited to dim <= " +
                         std::to_string(kRateTensorMaxDim) + ", got " + std::to_string(dim));
  }
}

void require_positive_width(double w, const char* what) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw ParameterError(std::string(what) + ": width must be positive and finite");
  }
}

// Hermitian part, so downstream products see an exactly Hermitian operand.
Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix double_commutator(const Matrix& a, const Matrix& b, const Matrix& rho) {
  const Matrix inner = b * rho - rho * b;
  return -0.5 * (a * inner - inner * a);
}

}  // namespace

double gaussian_delta(double x, double width) {
  require_positive_width(width, "gaussian_delta");
  const double u = x / width;
  return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * width);
}

CoarseGrainedL build_coarse_grained_L(const CouplingOperator& hprime, const EnergyBasis& basis,
                                      const CoarseGrainingParams& params) {
  require_same_dim(hprime.dim(), basis.dim(), "build_coarse_grained_L");
  const double t_bar = params.t_bar();
  const double hbar = params.hbar();
  const double prefactor = std::pow(2.0 * std::numbers::pi * t_bar * t_bar, 0.25) / hbar;
  const Matrix h = hprime.scaled();
  const auto n = h.rows();
  Matrix l(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = basis.gap(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                       t_bar / hbar;
      l(i, j) = prefactor * h(i, j) * std::exp(-0.25 * x * x);
    }
  }
  return CoarseGrainedL{hermitize(l), h, params, basis};
}

Matrix gfgr_apply(const CoarseGrainedL& lindblad, const Matrix& rho) {
  require_square(rho, "gfgr_apply");
  require_same_dim(static_cast<std::size_t>(rho.rows()), lindblad.dim(), "gfgr_apply");
  return double_commutator(lindblad.matrix, lindblad.matrix, rho);
}

RateTensor::RateTensor(std::size_t dim, RateKind kind)
    : dim_(dim), kind_(kind), entries_(dim * dim * dim * dim, Complex(0.0, 0.0)) {
  require_tensor_dim(dim);
}

RateTensor gfgr_rate_tensor(const CouplingOperator& hprime, const EnergyBasis& basis,
                            const CoarseGrainingParams& params) {
  require_same_dim(hprime.dim(), basis.dim(), "gfgr_rate_tensor");
  const std::size_t n = basis.dim();
  require_tensor_dim(n);
  const double hbar = params.hbar();
  const double eps = params.eps_bar();
  const double prefactor =
      (2.0 * std::numbers::pi / hbar) / (std::sqrt(2.0 * std::numbers::pi) * eps);
  const Matrix h = hprime.scaled();
  RateTensor out(n, RateKind::kGfgr);
  for (std::size_t l1 = 0; l1 < n; ++l1)
    for (std::size_t l2 = 0; l2 < n; ++l2)
      for (std::size_t p1 = 0; p1 < n; ++p1)
        for (std::size_t p2 = 0; p2 < n; ++p2) {
          const double g1 = basis.gap(l1, p1);
          const double g2 = basis.gap(l2, p2);
          const double weight = std::exp(-(g1 * g1 + g2 * g2) / (4.0 * eps * eps));
          out(l1, l2, p1, p2) = prefactor * weight *
                                h(static_cast<Eigen::Index>(l1), static_cast<Eigen::Index>(p1)) *
                                std::conj(h(static_cast<Eigen::Index>(l2),
                                            static_cast<Eigen::Index>(p2)));
        }
  return out;
}

RateTensor gfgr_rate_tensor(const CoarseGrainedL& lindblad) {
  return gfgr_rate_tensor(CouplingOperator(lindblad.coupling), lindblad.basis, lindblad.params);
}

RateTensor conventional_rate_tensor(const CouplingOperator& hprime, const EnergyBasis& basis,
                                    double eta, double hbar) {
  require_positive_width(eta, "conventional_rate_tensor");
  require_same_dim(hprime.dim(), basis.dim(), "conventional_rate_tensor");
  const std::size_t n = basis.dim();
  require_tensor_dim(n);
  const Matrix h = hprime.scaled();
  RateTensor out(n, RateKind::kConventional);
  for (std::size_t l1 = 0; l1 < n; ++l1)
    for (std::size_t l2 = 0; l2 < n; ++l2)
      for (std::size_t p1 = 0; p1 < n; ++p1)
        for (std::size_t p2 = 0; p2 < n; ++p2) {
          out(l1, l2, p1, p2) = (2.0 * std::numbers::pi / hbar) *
                                gaussian_delta(basis.gap(l2, p2), eta) *
                                h(static_cast<Eigen::Index>(l1), static_cast<Eigen::Index>(p1)) *
                                std::conj(h(static_cast<Eigen::Index>(l2),
                                            static_cast<Eigen::Index>(p2)));
        }
  return out;
}

Matrix rate_tensor_apply(const RateTensor& rates, const Matrix& rho) {
  require_square(rho, "rate_tensor_apply");
  const std::size_t n = rates.dim();
  require_same_dim(static_cast<std::size_t>(rho.rows()), n, "rate_tensor_apply");
  auto r = [&rho](std::size_t i, std::size_t j) {
    return rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      Complex direct(0.0, 0.0);
      Complex conjugate(0.0, 0.0);
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
          direct += rates(a, b, p, q) * r(p, q) - rates(a, q, p, p) * r(q, b);
          // (X^dagger)_{ab} = conj(X_{ba}) with rho^dagger = rho substituted.
          conjugate += std::conj(rates(b, a, p, q)) * r(q, p) -
                       std::conj(rates(b, q, p, p)) * r(a, q);
        }
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          0.5 * (direct + conjugate);
    }
  }
  return out;
}

SemiclassicalRates smoothed_fgr_rates(const CouplingOperator& hprime, const EnergyBasis& basis,
                                      const CoarseGrainingParams& params) {
  require_same_dim(hprime.dim(), basis.dim(), "smoothed_fgr_rates");
  const double hbar = params.hbar();
  const double eps = params.eps_bar();
  const Matrix h = hprime.scaled();
  const auto n = h.rows();
  SemiclassicalRates out{RealMatrix(n, n), Smoothing::kGaussian, eps};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.rates(i, j) = (2.0 * std::numbers::pi / hbar) * std::norm(h(i, j)) *
                        gaussian_delta(basis.gap(static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(j)),
                                       eps);
  return out;
}

SemiclassicalRates fgr_rates(const CouplingOperator& hprime, const EnergyBasis& basis, double eta,
                             double hbar) {
  require_positive_width(eta, "fgr_rates");
  require_same_dim(hprime.dim(), basis.dim(), "fgr_rates");
  const Matrix h = hprime.scaled();
  const auto n = h.rows();
  SemiclassicalRates out{RealMatrix(n, n), Smoothing::kDelta, eta};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.rates(i, j) = (2.0 * std::numbers::pi / hbar) * std::norm(h(i, j)) *
                        gaussian_delta(basis.gap(static_cast<std::size_t>(i),
                                                 static_cast<std::size_t>(j)),
                                       eta);
  return out;
}

SemiclassicalRates diagonal_rates(const RateTensor& tensor, Smoothing smoothing, double width) {
  const auto n = static_cast<Eigen::Index>(tensor.dim());
  SemiclassicalRates out{RealMatrix(n, n), smoothing, width};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      out.rates(i, j) = tensor(a, a, b, b).real();
    }
  return out;
}

RealVector boltzmann_rhs(const SemiclassicalRates& rates, const RealVector& f, double tol) {
  require_same_dim(static_cast<std::size_t>(f.size()), rates.dim(), "boltzmann_rhs");
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f(i) < -tol) {
      throw ValidationError("boltzmann_rhs: negative population at index " + std::to_string(i));
    }
  }
  if (std::abs(f.sum() - 1.0) > tol) {
    throw ValidationError("boltzmann_rhs: populations do not sum to 1");
  }
  const RealMatrix& p = rates.rates;
  // in: sum_l' P_{l l'} f_l'   out: f_l sum_l' P_{l' l}
  RealVector out = p * f - (p.colwise().sum().transpose().array() * f.array()).matrix();
  return out;
}

ConventionalKernel conventional_kernel(const CouplingOperator& hprime, const EnergyBasis& basis,
                                       double elapsed, double hbar) {
  require_same_dim(hprime.dim(), basis.dim(), "conventional_kernel");
  if (!(elapsed > 0.0) || !std::isfinite(elapsed)) {
    throw ParameterError("conventional_kernel: elapsed time must be positive and finite");
  }
  const Matrix h = hprime.scaled();
  const auto n = h.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double omega =
          basis.gap(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) / hbar;
      const double half = 0.5 * omega * elapsed;
      // integral_{-e}^{0} exp(i w s) ds = exp(-i w e / 2) * 2 sin(w e / 2) / w
      const double amplitude = (half == 0.0) ? elapsed : elapsed * std::sin(half) / half;
      k(i, j) = 2.0 * (h(i, j) / hbar) * std::polar(amplitude, -half);
    }
  }
  return ConventionalKernel{k, elapsed, std::nullopt, basis};
}

ConventionalKernel completed_collision_kernel(const CouplingOperator& hprime,
                                              const EnergyBasis& basis, double eta, double hbar) {
  require_positive_width(eta, "completed_collision_kernel");
  require_same_dim(hprime.dim(), basis.dim(), "completed_collision_kernel");
  (void)hbar;  // 2 (H'/hbar) * pi * hbar * delta(gap): hbar cancels
  const Matrix h = hprime.scaled();
  const auto n = h.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = 2.0 * std::numbers::pi * h(i, j) *
                gaussian_delta(basis.gap(static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j)),
                               eta);
  return ConventionalKernel{hermitize(k), std::numeric_limits<double>::infinity(), eta, basis};
}

Matrix conventional_apply(const CouplingOperator& hprime, const ConventionalKernel& kernel,
                          const Matrix& rho, double hbar) {
  require_square(rho, "conventional_apply");
  require_same_dim(hprime.dim(), static_cast<std::size_t>(kernel.matrix.rows()),
                   "conventional_apply");
  require_same_dim(static_cast<std::size_t>(rho.rows()), hprime.dim(), "conventional_apply");
  const Matrix hcal = hprime.scaled() / hbar;
  return double_commutator(hcal, kernel.matrix, rho);
}

}  // namespace gfgr
