#include "gfgr/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gfgr/liouville.hpp"

namespace gfgr {

PositivityAudit positivity_audit(const TrajectoryRecord& traj, double threshold) {
  PositivityAudit audit;
  audit.threshold = threshold;
  audit.global_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double m = hermitian_eigenvalues(traj.states[k]).minCoeff();
    audit.min_eigenvalues.push_back(m);
    audit.global_min = std::min(audit.global_min, m);
    if (m < threshold && !audit.first_violation_time) audit.first_violation_time = traj.times[k];
  }
  return audit;
}

T3Report t3_coefficient(const Generator& generator) {
  if (generator.dim() != 2) {
    throw DimensionError("t3_coefficient: needs a two-level generator, got dim " +
                         std::to_string(generator.dim()));
  }
  // Basis matrices for unit steps in p, x, y, s.
  std::array<Matrix, 4> inputs;
  for (auto& m : inputs) m = Matrix::Zero(2, 2);
  inputs[0](0, 0) = 0.5;
  inputs[0](1, 1) = -0.5;
  inputs[1](0, 1) = 1.0;
  inputs[1](1, 0) = 1.0;
  inputs[2](0, 1) = kI;
  inputs[2](1, 0) = -kI;
  inputs[3](0, 0) = 0.5;
  inputs[3](1, 1) = 0.5;

  T3Report r;
  for (int c = 0; c < 4; ++c) {
    const Matrix out = generator.apply(inputs[static_cast<std::size_t>(c)]);
    r.coordinates(0, c) = (out(0, 0) - out(1, 1)).real();
    r.coordinates(1, c) = out(0, 1).real();
    r.coordinates(2, c) = out(0, 1).imag();
    r.coordinates(3, c) = (out(0, 0) + out(1, 1)).real();
  }
  const Eigen::Matrix4d& m = r.coordinates;
  r.population_from_coherence = std::hypot(m(0, 1), m(0, 2));
  r.coherence_from_population = std::hypot(m(1, 0), m(2, 0));
  r.t3_norm = std::hypot(r.population_from_coherence, r.coherence_from_population);
  r.t1_rate = -m(0, 0);
  r.t2_rate = -0.5 * (m(1, 1) + m(2, 2));
  return r;
}

GeneratorAudit generator_distance(const Generator& a, const Generator& b) {
  if (a.basis().energies() != b.basis().energies()) {
    throw ValidationError("generator_distance: generators are defined on different bases");
  }
  const Matrix diff = a.liouvillian() - b.liouvillian();
  const auto n = static_cast<Eigen::Index>(a.dim());
  std::vector<Eigen::Index> pop;
  std::vector<Eigen::Index> coh;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) (i == j ? pop : coh).push_back(i + j * n);

  auto block_norm = [&diff](const std::vector<Eigen::Index>& rows,
                            const std::vector<Eigen::Index>& cols) {
    if (rows.empty() || cols.empty()) return 0.0;
    Matrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c)
        sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = diff(rows[r], cols[c]);
    return spectral_norm(sub);
  };

  GeneratorAudit audit;
  audit.kind_a = a.name();
  audit.kind_b = b.name();
  audit.spectral_distance = spectral_norm(diff);
  audit.frobenius_distance = diff.norm();
  audit.population_from_population = block_norm(pop, pop);
  audit.population_from_coherence = block_norm(pop, coh);
  audit.coherence_from_population = block_norm(coh, pop);
  audit.coherence_from_coherence = block_norm(coh, coh);
  return audit;
}

ConvergenceTable fgr_convergence(const LadderScenario& ladder, const std::vector<double>& eps_bars,
                                 double separation_ratio) {
  if (ladder.levels < 2) throw ParameterError("fgr_convergence: ladder needs at least 2 levels");
  if (!(ladder.spacing > 0.0)) throw ParameterError("fgr_convergence: spacing must be positive");
  const std::size_t probe = ladder.probe.value_or((ladder.levels - 1) / 2);
  if (probe >= ladder.levels) throw ParameterError("fgr_convergence: probe level out of range");

  std::vector<double> energies(ladder.levels);
  for (std::size_t i = 0; i < ladder.levels; ++i) {
    energies[i] = (static_cast<double>(i) - static_cast<double>(probe)) * ladder.spacing;
  }
  const EnergyBasis basis(energies);
  const auto n = static_cast<Eigen::Index>(ladder.levels);
  const CouplingOperator coupling(Matrix::Constant(n, n, Complex(ladder.coupling, 0.0)));
  const double golden =
      (2.0 * std::numbers::pi / ladder.hbar) * ladder.coupling * ladder.coupling / ladder.spacing;
  const double half_band = 0.5 * ladder.bandwidth();

  ConvergenceTable table;
  for (double eps : eps_bars) {
    const CoarseGrainingParams params = CoarseGrainingParams::from_eps_bar(eps, ladder.hbar);
    const SemiclassicalRates rates = smoothed_fgr_rates(coupling, basis, params);
    ConvergenceRow row;
    row.eps_bar = eps;
    row.spacing = ladder.spacing;
    row.bandwidth = ladder.bandwidth();
    const auto p = static_cast<Eigen::Index>(probe);
    row.total_rate = rates.rates.row(p).sum();
    row.out_rate_excluding_self = row.total_rate - rates.rates(p, p);
    row.golden_rule_rate = golden;
    row.error_defined = golden > 0.0;
    if (row.error_defined) {
      row.relative_error = std::abs(row.total_rate - golden) / golden;
      row.relative_error_excluding_self = std::abs(row.out_rate_excluding_self - golden) / golden;
    } else {
      row.relative_error = std::numeric_limits<double>::quiet_NaN();
      row.relative_error_excluding_self = std::numeric_limits<double>::quiet_NaN();
    }
    row.scale_separated =
        ladder.spacing / eps <= separation_ratio && eps / half_band <= separation_ratio;
    row.resolves_discreteness = eps <= ladder.spacing;
    table.rows.push_back(row);
  }

  int direction = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const double a = table.rows[i - 1].relative_error;
    const double b = table.rows[i].relative_error;
    if (std::isnan(a) || std::isnan(b) || a == b) continue;
    const int d = b > a ? 1 : -1;
    if (direction != 0 && d != direction) table.monotone = false;
    direction = d;
  }
  return table;
}

double convergence_error_extended(const LadderScenario& ladder, double eps_bar) {
  using Real = boost::multiprecision::cpp_bin_float_100;
  if (ladder.levels < 2) throw ParameterError("convergence_error_extended: ladder needs at least 2 levels");
  if (!(ladder.spacing > 0.0) || !(eps_bar > 0.0)) {
    throw ParameterError("convergence_error_extended: spacing and eps_bar must be positive");
  }
  const std::size_t probe = ladder.probe.value_or((ladder.levels - 1) / 2);
  if (probe >= ladder.levels) throw ParameterError("convergence_error_extended: probe level out of range");
  if (ladder.coupling == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const Real pi = boost::math::constants::pi<Real>();
  const Real delta(ladder.spacing);
  const Real eps(eps_bar);
  const Real h2 = Real(ladder.coupling) * Real(ladder.coupling);
  const Real hbar(ladder.hbar);
  // (2 pi / hbar) |H'|^2 / (sqrt(2 pi) eps) * exp(-gap^2 / (2 eps^2)), same as |L|^2
  const Real pref = 2 * pi / hbar * h2 / (sqrt(2 * pi) * eps);
  Real total = 0;
  for (std::size_t i = 0; i < ladder.levels; ++i) {
    const Real gap = (Real(static_cast<double>(i)) - Real(static_cast<double>(probe))) * delta;
    total += pref * exp(-gap * gap / (2 * eps * eps));
  }
  const Real golden = 2 * pi / hbar * h2 / delta;
  return static_cast<double>(abs(total - golden) / golden);
}

std::optional<WitnessCandidate> search_positivity_witness(const WitnessSearchConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  PropagationSpec spec;
  spec.t_final = config.t_final;
  spec.dt = config.dt;
  spec.method = Method::kExactExponential;

  std::optional<WitnessCandidate> best;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const Eigen::Index d = (trial % 2 == 0) ? 2 : 3;
    std::vector<double> energies(static_cast<std::size_t>(d));
    for (auto& e : energies) e = 2.0 * unit(rng);
    std::sort(energies.begin(), energies.end());

    Matrix h(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) h(i, j) = Complex(normal(rng), normal(rng));
    const double scale = 0.05 + 0.45 * unit(rng);
    h = 0.5 * scale * (h + h.adjoint()).eval();
    const double eta = 0.05 + 0.95 * unit(rng);

    ComplexVector psi(d);
    for (Eigen::Index i = 0; i < d; ++i) psi(i) = Complex(normal(rng), normal(rng));
    psi.normalize();
    const Matrix rho0 = psi * psi.adjoint();

    const EnergyBasis basis(energies);
    const CouplingOperator coupling(h);
    const Generator gen = Generator::conventional(
        coupling, completed_collision_kernel(coupling, basis, eta), 1.0, true);

    const TrajectoryRecord traj = propagate_master(gen, rho0, spec);
    bool bounded = true;
    for (const Matrix& s : traj.states) {
      if (hermitian_eigenvalues(s).cwiseAbs().maxCoeff() > config.spectrum_bound) {
        bounded = false;
        break;
      }
    }
    if (!bounded) continue;
    const PositivityAudit audit = positivity_audit(traj);
    if (!best || audit.global_min < best->min_eigenvalue) {
      best = WitnessCandidate{energies, h, eta, rho0, audit.global_min,
                              audit.first_violation_time, trial};
    }
  }
  return best;
}

}  // namespace gfgr
