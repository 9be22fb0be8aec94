#include "gfgr/evolve.hpp"

#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <map>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "gfgr/liouville.hpp"

namespace gfgr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite state encountered");
}

Matrix energy_diagonal(const EnergyBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Matrix h = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = basis.energy(static_cast<std::size_t>(i));
  return h;
}

std::optional<double> correlation_time(const Generator& g) {
  return std::visit(
      Overloaded{[](const Generator::Gfgr& p) -> std::optional<double> {
                   return p.lindblad.params.t_bar();
                 },
                 [](const Generator::Conventional&) -> std::optional<double> {
                   return std::nullopt;
                 },
                 [](const Generator::Projected& p) -> std::optional<double> {
                   return p.amplitudes.t_bar;
                 }},
      g.part());
}

void rk4_advance(const Generator& gen, Matrix& rho, double interval, double max_step) {
  if (interval <= 0.0) return;
  const auto steps = static_cast<long>(std::ceil(interval / max_step - 1e-9));
  const double h = interval / static_cast<double>(std::max(1L, steps));
  for (long s = 0; s < std::max(1L, steps); ++s) {
    const Matrix k1 = gen.apply(rho);
    const Matrix k2 = gen.apply(rho + 0.5 * h * k1);
    const Matrix k3 = gen.apply(rho + 0.5 * h * k2);
    const Matrix k4 = gen.apply(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

using OdeState = std::vector<double>;

OdeState pack(const Matrix& m) {
  OdeState out(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out[static_cast<std::size_t>(2 * i)] = m.data()[i].real();
    out[static_cast<std::size_t>(2 * i + 1)] = m.data()[i].imag();
  }
  return out;
}

Matrix unpack(const OdeState& s, Eigen::Index dim) {
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = Complex(s[static_cast<std::size_t>(2 * i)], s[static_cast<std::size_t>(2 * i + 1)]);
  }
  return m;
}

}  // namespace

void PropagationSpec::validate() const {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ParameterError("PropagationSpec: t_final must be positive");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("PropagationSpec: dt must be positive");
  if (record_every == 0) throw ParameterError("PropagationSpec: record_every must be >= 1");
}

std::vector<double> PropagationSpec::snapshot_times() const {
  validate();
  const double stride = dt * static_cast<double>(record_every);
  const auto k_max = static_cast<long>(std::floor(t_final / stride + 1e-9));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(k_max) + 2);
  for (long k = 0; k <= k_max; ++k) times.push_back(static_cast<double>(k) * stride);
  if (t_final - times.back() > 1e-12 * t_final) times.push_back(t_final);
  return times;
}

SnapshotDiagnostics diagnose(const Matrix& rho) {
  SnapshotDiagnostics d;
  d.trace = rho.trace().real();
  const RealVector w = hermitian_eigenvalues(rho);
  d.min_eigenvalue = w.minCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) s -= w(i) * std::log(w(i));
  }
  d.entropy = s;
  d.purity = (rho * rho).trace().real();
  return d;
}

void TrajectoryRecord::push(double t, Matrix rho) {
  if (!times.empty() && !(t > times.back())) {
    throw NumericalError("TrajectoryRecord: snapshot times must be strictly increasing");
  }
  diagnostics.push_back(diagnose(rho));
  times.push_back(t);
  states.push_back(std::move(rho));
}

Generator::Generator(Part part, EnergyBasis basis, double hbar, bool free_evolution)
    : part_(std::move(part)), basis_(std::move(basis)), hbar_(hbar), free_evolution_(free_evolution) {}

Generator Generator::gfgr(CoarseGrainedL lindblad, bool free_evolution) {
  EnergyBasis basis = lindblad.basis;
  const double hbar = lindblad.params.hbar();
  return Generator(Gfgr{std::move(lindblad)}, std::move(basis), hbar, free_evolution);
}

Generator Generator::conventional(CouplingOperator coupling, ConventionalKernel kernel, double hbar,
                                  bool free_evolution) {
  require_same_dim(coupling.dim(), kernel.basis.dim(), "Generator::conventional");
  EnergyBasis basis = kernel.basis;
  return Generator(Conventional{std::move(coupling), std::move(kernel)}, std::move(basis), hbar,
                   free_evolution);
}

Generator Generator::projected(TransitionAmplitudes amplitudes, const CoarseGrainedL& lindblad,
                               bool free_evolution) {
  require_same_dim(amplitudes.dim(), lindblad.dim(), "Generator::projected");
  return Generator(Projected{std::move(amplitudes)}, lindblad.basis, lindblad.params.hbar(),
                   free_evolution);
}

std::string Generator::name() const {
  return std::visit(Overloaded{[](const Gfgr&) { return std::string("gfgr"); },
                               [](const Conventional& c) {
                                 return std::string(c.kernel.eta ? "conventional"
                                                                 : "conventional_kernel");
                               },
                               [](const Projected&) { return std::string("projected"); }},
                    part_);
}

Matrix Generator::apply(const Matrix& rho) const {
  Matrix out = std::visit(
      Overloaded{[&](const Gfgr& p) { return gfgr_apply(p.lindblad, rho); },
                 [&](const Conventional& p) {
                   return conventional_apply(p.coupling, p.kernel, rho, hbar_);
                 },
                 [&](const Projected& p) { return projected_generator_apply(p.amplitudes, rho); }},
      part_);
  if (free_evolution_) {
    const auto n = rho.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        out(i, j) += (-kI / hbar_) *
                     basis_.gap(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                     rho(i, j);
  }
  return out;
}

Matrix Generator::liouvillian() const {
  Matrix l = std::visit(
      Overloaded{[](const Gfgr& p) -> Matrix {
                   const Matrix ad = commutator_superop(p.lindblad.matrix);
                   return -0.5 * ad * ad;
                 },
                 [&](const Conventional& p) -> Matrix {
                   const Matrix hcal = p.coupling.scaled() / hbar_;
                   return -0.5 * commutator_superop(hcal) * commutator_superop(p.kernel.matrix);
                 },
                 [](const Projected& p) -> Matrix {
                   const auto n = static_cast<Eigen::Index>(p.amplitudes.dim());
                   Matrix out = Matrix::Zero(n * n, n * n);
                   Matrix loss = Matrix::Zero(n, n);
                   for (const Matrix& d : p.amplitudes.ops) {
                     out += sandwich(d, d.adjoint());
                     loss += d.adjoint() * d;
                   }
                   out -= 0.5 * (left_multiplication(loss) + right_multiplication(loss));
                   return out;
                 }},
      part_);
  if (free_evolution_) l += hamiltonian_superop(energy_diagonal(basis_), hbar_);
  return l;
}

TrajectoryRecord exact_trajectory(const Matrix& h_total, const DensityMatrix& rho0,
                                  const PropagationSpec& spec, double hbar) {
  require_square(h_total, "exact_trajectory");
  require_same_dim(static_cast<std::size_t>(h_total.rows()), rho0.dim(), "exact_trajectory");
  if (hermiticity_defect(h_total) > 1e-12) {
    throw ValidationError("exact_trajectory: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h_total + h_total.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("exact_trajectory: eigensolver failed");
  const Matrix& v = es.eigenvectors();
  const RealVector& w = es.eigenvalues();
  // Work in the eigenbasis of H: rho_ij(t) = rho_ij(0) exp(-i (w_i - w_j) t / hbar).
  const Matrix rho_eig = v.adjoint() * rho0.matrix() * v;
  const auto n = rho_eig.rows();
  TrajectoryRecord rec;
  for (double t : spec.snapshot_times()) {
    Matrix r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        r(i, j) = rho_eig(i, j) * std::polar(1.0, -(w(i) - w(j)) * t / hbar);
    Matrix rho = v * r * v.adjoint();
    require_finite(rho, "exact_trajectory");
    rec.push(t, std::move(rho));
  }
  return rec;
}

TrajectoryRecord reduced_reference_trajectory(const Matrix& h_sys, const Matrix& h_env,
                                              const Matrix& h_int, const DensityMatrix& omega0,
                                              const DensityMatrix& rho0_sys,
                                              const PropagationSpec& spec, double hbar,
                                              std::size_t dimension_cap) {
  require_square(h_sys, "reduced_reference_trajectory");
  require_square(h_env, "reduced_reference_trajectory");
  require_same_dim(static_cast<std::size_t>(h_sys.rows()), rho0_sys.dim(),
                   "reduced_reference_trajectory");
  require_same_dim(static_cast<std::size_t>(h_env.rows()), omega0.dim(),
                   "reduced_reference_trajectory");
  const Factorization f{rho0_sys.dim(), omega0.dim()};
  require_same_dim(static_cast<std::size_t>(h_int.rows()), f.dim_a * f.dim_b,
                   "reduced_reference_trajectory");
  const auto ns = h_sys.rows();
  const auto ne = h_env.rows();
  const Matrix h_total = tensor_product(h_sys, Matrix::Identity(ne, ne), dimension_cap) +
                         tensor_product(Matrix::Identity(ns, ns), h_env, dimension_cap) + h_int;
  const DensityMatrix rho0 = tensor_product(rho0_sys, omega0, dimension_cap);
  TrajectoryRecord full = exact_trajectory(h_total, rho0, spec, hbar);
  TrajectoryRecord reduced;
  for (std::size_t k = 0; k < full.size(); ++k) {
    reduced.push(full.times[k], partial_trace(full.states[k], f, Factor::kFirst));
  }
  return reduced;
}

TrajectoryRecord propagate_master(const Generator& generator, const Matrix& rho0,
                                  const PropagationSpec& spec) {
  require_square(rho0, "propagate_master");
  require_same_dim(static_cast<std::size_t>(rho0.rows()), generator.dim(), "propagate_master");
  const std::vector<double> times = spec.snapshot_times();
  const std::size_t dim = generator.dim();

  TrajectoryRecord rec;
  Method method = spec.method;
  double max_step = spec.dt;
  if (method == Method::kAuto) {
    if (dim <= kAutoExponentialMaxDim) {
      method = Method::kExactExponential;
    } else {
      method = Method::kRk4;
      if (auto t_bar = correlation_time(generator)) max_step = std::min(spec.dt, *t_bar / 100.0);
    }
  }
  if (method == Method::kExactExponential && dim > kExponentialMaxDim) {
    const std::string notice = "propagate_master: dim " + std::to_string(dim) +
                               " exceeds the exponential cap " +
                               std::to_string(kExponentialMaxDim) + "; stepping with rk4";
    std::clog << notice << '\n';
    rec.notices.push_back(notice);
    method = Method::kRk4;
  }

  Matrix rho = rho0;
  rec.push(times.front(), rho);
  const auto n = static_cast<Eigen::Index>(dim);

  switch (method) {
    case Method::kExactExponential: {
      const Matrix liouvillian = generator.liouvillian();
      std::map<double, Matrix> propagators;
      ComplexVector v = vectorize(rho);
      for (std::size_t k = 1; k < times.size(); ++k) {
        const double h = times[k] - times[k - 1];
        auto it = propagators.find(h);
        if (it == propagators.end()) {
          it = propagators.emplace(h, (liouvillian * h).exp().eval()).first;
        }
        v = it->second * v;
        Matrix state = unvectorize(v, n);
        require_finite(state, "propagate_master");
        rec.push(times[k], std::move(state));
      }
      break;
    }
    case Method::kRk4: {
      for (std::size_t k = 1; k < times.size(); ++k) {
        rk4_advance(generator, rho, times[k] - times[k - 1], max_step);
        require_finite(rho, "propagate_master");
        rec.push(times[k], rho);
      }
      break;
    }
    case Method::kAdaptive: {
      namespace ode = boost::numeric::odeint;
      OdeState x = pack(rho);
      auto system = [&](const OdeState& s, OdeState& dsdt, double) {
        dsdt = pack(generator.apply(unpack(s, n)));
      };
      auto stepper =
          ode::make_controlled(spec.abs_tol, spec.rel_tol, ode::runge_kutta_dopri5<OdeState>());
      for (std::size_t k = 1; k < times.size(); ++k) {
        const double h = times[k] - times[k - 1];
        ode::integrate_adaptive(stepper, system, x, times[k - 1], times[k],
                                std::min(h, spec.dt));
        Matrix state = unpack(x, n);
        require_finite(state, "propagate_master");
        rec.push(times[k], std::move(state));
      }
      break;
    }
    case Method::kAuto:
      break;
  }
  return rec;
}

bool ScanReport::non_increasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].distance_rescaled > rows[i - 1].distance_rescaled) return false;
  }
  return true;
}

ScanRow weak_coupling_row(const BipartiteFixture& fixture, double g, double t_bar) {
  if (!(g >= 0.0)) throw ParameterError("weak_coupling_row: g must be >= 0");
  const std::size_t ns = fixture.system_energies.size();
  const std::size_t ne = fixture.environment_energies.size();
  std::vector<double> product;
  product.reserve(ns * ne);
  for (double es : fixture.system_energies)
    for (double ee : fixture.environment_energies) product.push_back(es + ee);
  const EnergyBasis basis(product);
  const CouplingOperator coupling(fixture.interaction, g);
  // With g = 0 the Lindblad operator vanishes whatever t_bar is.
  const CoarseGrainingParams params(g > 0.0 ? t_bar : 1.0, fixture.hbar);
  const Generator gen = Generator::gfgr(build_coarse_grained_L(coupling, basis, params), true);

  const DensityMatrix rho0_sys(fixture.rho0_system);
  const DensityMatrix omega0(fixture.omega0);
  const Factorization f{ns, ne};
  const Matrix rho0 = tensor_product(rho0_sys, omega0).matrix();

  Matrix h_sys = Matrix::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ns));
  for (std::size_t i = 0; i < ns; ++i)
    h_sys(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        fixture.system_energies[i];
  Matrix h_env = Matrix::Zero(static_cast<Eigen::Index>(ne), static_cast<Eigen::Index>(ne));
  for (std::size_t i = 0; i < ne; ++i)
    h_env(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        fixture.environment_energies[i];

  auto max_distance = [&](double t_final) {
    PropagationSpec spec;
    spec.t_final = t_final;
    spec.dt = t_final / static_cast<double>(fixture.snapshots);
    spec.method = Method::kExactExponential;
    const TrajectoryRecord approx = propagate_master(gen, rho0, spec);
    const TrajectoryRecord exact = reduced_reference_trajectory(
        h_sys, h_env, g * fixture.interaction, omega0, rho0_sys, spec, fixture.hbar);
    double worst = 0.0;
    for (std::size_t k = 0; k < approx.size(); ++k) {
      const Matrix reduced = partial_trace(approx.states[k], f, Factor::kFirst);
      worst = std::max(worst, trace_distance(reduced, exact.states[k]));
    }
    return worst;
  };

  ScanRow row;
  row.g = g;
  row.t_bar = g > 0.0 ? t_bar : std::numeric_limits<double>::infinity();
  row.distance_unscaled = max_distance(fixture.tau_final);
  row.distance_rescaled =
      g > 0.0 ? max_distance(fixture.tau_final / (g * g)) : row.distance_unscaled;
  return row;
}

ScanReport weak_coupling_scan(const BipartiteFixture& fixture, const ScalingSchedule& schedule) {
  ScanReport report;
  report.t_ref = schedule.t_ref();
  report.xi = schedule.xi();
  std::vector<std::future<ScanRow>> pending;
  for (double g : schedule.g_values()) {
    pending.push_back(std::async(std::launch::async, [&fixture, &schedule, g] {
      return weak_coupling_row(fixture, g, schedule.t_bar_for(g));
    }));
  }
  for (auto& p : pending) report.rows.push_back(p.get());
  return report;
}

}  // namespace gfgr
