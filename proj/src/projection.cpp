#include "gfgr/projection.hpp"

#include <cmath>

#include "gfgr/liouville.hpp"

namespace gfgr {

namespace {

constexpr double kCompletenessTol = 1e-12;
constexpr double kIdempotenceTol = 1e-10;

// Fixed probe observable for the idempotence test; generic enough that no
// nontrivial family passes by accident.
Matrix idempotence_probe(Eigen::Index n) {
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = std::sin(1.3 * static_cast<double>(i + 1) + 0.7 * static_cast<double>(j));
      const double y = std::cos(0.9 * static_cast<double>(i) - 1.1 * static_cast<double>(j + 2));
      a(i, j) = Complex(x, y);
    }
  }
  return a + a.adjoint();
}

}  // namespace

ProjectionScheme::ProjectionScheme(std::vector<Matrix> kraus_ops, ProjectionKind kind,
                                   std::optional<Matrix> environment_state)
    : kraus_(std::move(kraus_ops)), kind_(kind), omega_(std::move(environment_state)), dim_(0) {
  if (kraus_.empty()) throw ValidationError("ProjectionScheme: empty Kraus family");
  require_square(kraus_.front(), "ProjectionScheme");
  dim_ = static_cast<std::size_t>(kraus_.front().rows());
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix completeness = Matrix::Zero(n, n);
  for (const Matrix& v : kraus_) {
    require_square(v, "ProjectionScheme");
    require_same_dim(static_cast<std::size_t>(v.rows()), dim_, "ProjectionScheme");
    completeness += v.adjoint() * v;
  }
  const double defect = (completeness - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > kCompletenessTol) {
    throw ValidationError("ProjectionScheme: Kraus family is not complete (defect " +
                          std::to_string(defect) + ")");
  }
  const Matrix probe = idempotence_probe(n);
  const Matrix once = apply_to_observable(probe);
  const Matrix twice = apply_to_observable(once);
  if ((twice - once).cwiseAbs().maxCoeff() > kIdempotenceTol) {
    throw ValidationError("ProjectionScheme: Kraus family does not define a projection");
  }
}

ProjectionScheme ProjectionScheme::trivial(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return ProjectionScheme({Matrix::Identity(n, n)}, ProjectionKind::kCustom);
}

Matrix ProjectionScheme::apply_to_observable(const Matrix& a) const {
  require_same_dim(static_cast<std::size_t>(a.rows()), dim_, "apply_to_observable");
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const Matrix& v : kraus_) out += v.adjoint() * a * v;
  return out;
}

Matrix ProjectionScheme::apply_to_state(const Matrix& rho) const {
  require_same_dim(static_cast<std::size_t>(rho.rows()), dim_, "apply_to_state");
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& v : kraus_) out += v * rho * v.adjoint();
  return out;
}

ProjectionScheme block_projection(const std::vector<std::vector<std::size_t>>& blocks,
                                  std::size_t dim) {
  if (dim == 0) throw DimensionError("block_projection: dim must be >= 1");
  std::vector<int> owner(dim, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw ValidationError("block_projection: empty block");
    for (std::size_t label : blocks[b]) {
      if (label >= dim) {
        throw ValidationError("block_projection: label " + std::to_string(label) +
                              " outside the basis");
      }
      if (owner[label] != -1) {
        throw ValidationError("block_projection: label " + std::to_string(label) +
                              " appears in more than one block");
      }
      owner[label] = static_cast<int>(b);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (owner[i] == -1) {
      throw ValidationError("block_projection: label " + std::to_string(i) +
                            " is not covered by any block");
    }
  }
  const auto n = static_cast<Eigen::Index>(dim);
  std::vector<Matrix> kraus;
  kraus.reserve(blocks.size());
  for (const auto& block : blocks) {
    Matrix p = Matrix::Zero(n, n);
    for (std::size_t label : block) {
      p(static_cast<Eigen::Index>(label), static_cast<Eigen::Index>(label)) = 1.0;
    }
    kraus.push_back(std::move(p));
  }
  return ProjectionScheme(std::move(kraus), ProjectionKind::kBlock);
}

ProjectionScheme partial_trace_projection(std::size_t system_dim, std::size_t env_dim,
                                          const DensityMatrix& omega) {
  require_same_dim(omega.dim(), env_dim, "partial_trace_projection");
  if (system_dim == 0) throw DimensionError("partial_trace_projection: system_dim must be >= 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(omega.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("partial_trace_projection: eigensolver did not converge");
  }
  const auto ne = static_cast<Eigen::Index>(env_dim);
  const auto ns = static_cast<Eigen::Index>(system_dim);
  const Matrix id_sys = Matrix::Identity(ns, ns);
  std::vector<Matrix> kraus;
  for (Eigen::Index k = 0; k < ne; ++k) {
    const double p = es.eigenvalues()(k);
    if (p <= 0.0) continue;
    const ComplexVector ket = es.eigenvectors().col(k);
    for (Eigen::Index j = 0; j < ne; ++j) {
      Matrix env = Matrix::Zero(ne, ne);
      env.col(j) = ket;  // |k><j|
      kraus.push_back(std::sqrt(p) * tensor_product(id_sys, env));
    }
  }
  return ProjectionScheme(std::move(kraus), ProjectionKind::kPartialTrace, omega.matrix());
}

FirstOrderReport first_order_check(const CouplingOperator& hprime, const ProjectionScheme& scheme,
                                   const Matrix& rho, double relative_threshold) {
  require_same_dim(hprime.dim(), scheme.dim(), "first_order_check");
  const Matrix h = hprime.scaled();
  const Matrix projected = scheme.apply_to_state(rho);
  const Matrix defect = scheme.apply_to_state(h * projected - projected * h);
  FirstOrderReport report;
  report.defect = spectral_norm(defect);
  report.threshold = relative_threshold * spectral_norm(h);
  report.exceeds_threshold = report.defect > report.threshold;
  return report;
}

TransitionAmplitudes transition_amplitudes(const CoarseGrainedL& lindblad,
                                           const ProjectionScheme& scheme) {
  require_same_dim(lindblad.dim(), scheme.dim(), "transition_amplitudes");
  const auto& v = scheme.kraus_ops();
  TransitionAmplitudes out;
  out.kraus_count = v.size();
  out.t_bar = lindblad.params.t_bar();
  out.ops.reserve(v.size() * v.size());
  for (const Matrix& va : v)
    for (const Matrix& vb : v) out.ops.push_back(va * lindblad.matrix * vb);
  return out;
}

Matrix projected_generator_apply(const TransitionAmplitudes& amplitudes, const Matrix& rho) {
  require_square(rho, "projected_generator_apply");
  require_same_dim(static_cast<std::size_t>(rho.rows()), amplitudes.dim(),
                   "projected_generator_apply");
  Matrix gain = Matrix::Zero(rho.rows(), rho.cols());
  Matrix loss = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& d : amplitudes.ops) {
    gain += d * rho * d.adjoint();
    loss += d.adjoint() * d;
  }
  return gain - 0.5 * (loss * rho + rho * loss);
}

}  // namespace gfgr
