#include <catch_amalgamated.hpp>

#include <numbers>

#include "gfgr/liouville.hpp"
#include "gfgr/superop.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace gfgr;
using namespace gfgr::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix off_diagonal_pair(double v) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = v;
  return m;
}

double rel_diff(const Matrix& a, const Matrix& b) {
  return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

}  // namespace

TEST_CASE("L vanishes without coupling", "[superop][L]") {
  const EnergyBasis basis({0.0, 0.3, 1.2});
  for (double t_bar : {0.1, 1.0, 9.0}) {
    const CoarseGrainedL L = build_coarse_grained_L(CouplingOperator(Matrix::Zero(3, 3)), basis,
                                                    CoarseGrainingParams(t_bar));
    CHECK(max_abs(L.matrix) == 0.0);
  }
}

TEST_CASE("L at zero gap carries no Gaussian suppression", "[superop][L]") {
  const EnergyBasis basis({0.5, 0.5});
  const double t_bar = 1.7;
  const double hbar = 0.6;
  const CoarseGrainedL L = build_coarse_grained_L(CouplingOperator(off_diagonal_pair(0.2)), basis,
                                                  CoarseGrainingParams(t_bar, hbar));
  CHECK_THAT(L.matrix(0, 1).real(),
             WithinRel(std::pow(2.0 * kPi * t_bar * t_bar, 0.25) * 0.2 / hbar, 1e-15));
}

TEST_CASE("two-level L entry matches the closed form and quadrature", "[superop][L]") {
  const EnergyBasis basis({0.0, 1.0});
  const CouplingOperator h(off_diagonal_pair(0.1));
  const CoarseGrainedL L = build_coarse_grained_L(h, basis, CoarseGrainingParams(2.0));
  const double expected = std::pow(8.0 * kPi, 0.25) * 0.1 * std::exp(-1.0);
  CHECK_THAT(L.matrix(0, 1).real(), WithinRel(expected, 1e-15));
  CHECK_THAT(L.matrix(0, 1).imag(), WithinAbs(0.0, 1e-18));
  const Matrix quad = lindblad_by_quadrature(h, basis, 2.0);
  CHECK(rel_diff(L.matrix, quad) <= 1e-8);
}

TEST_CASE("L agrees with quadrature across gaps", "[superop][L][property]") {
  // Double-precision quadrature resolves the Gaussian tail to 1e-8 relative up
  // to gaps of about 6 / t_bar; the extended-precision sweep to 10 / t_bar is
  // part of the acceptance suite.
  Rng rng(7);
  for (double t_bar : {0.5, 1.0, 3.0}) {
    for (int k = 0; k <= 12; ++k) {
      const double gap = 0.5 * k / t_bar;
      const double hbar = uniform(rng, 0.5, 2.0);
      const EnergyBasis basis({0.0, gap * hbar});
      Matrix hm = Matrix::Zero(2, 2);
      hm(0, 1) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
      hm(1, 0) = std::conj(hm(0, 1));
      hm(0, 0) = uniform(rng, -1, 1);
      const CouplingOperator h(hm);
      const CoarseGrainedL L = build_coarse_grained_L(h, basis, CoarseGrainingParams(t_bar, hbar));
      const Matrix quad = lindblad_by_quadrature(h, basis, t_bar, hbar);
      CHECK(rel_diff(L.matrix.col(1), quad.col(1)) <= 1e-8);
      CHECK(std::abs(L.matrix(0, 1) - quad(0, 1)) <= 1e-8 * std::abs(quad(0, 1)));
    }
  }
}

TEST_CASE("L is Hermitian and linear in the coupling scale", "[superop][L][property]") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 6);
    const EnergyBasis basis(random_energies(rng, std::size_t(dim)));
    const Matrix hm = random_hermitian(rng, dim);
    const CoarseGrainingParams params(uniform(rng, 0.5, 8.0));
    const double g = uniform(rng, 0.0, 2.0);
    const CoarseGrainedL unit = build_coarse_grained_L(CouplingOperator(hm), basis, params);
    const CoarseGrainedL scaled = build_coarse_grained_L(CouplingOperator(hm, g), basis, params);
    CHECK(hermiticity_defect(unit.matrix) <= 1e-12);
    CHECK(max_abs(scaled.matrix - g * unit.matrix) <= 1e-14 * (1.0 + max_abs(unit.matrix)));
  }
  CHECK_THROWS_AS(build_coarse_grained_L(CouplingOperator(off_diagonal_pair(1.0)),
                                         EnergyBasis({0.0}), CoarseGrainingParams(1.0)),
                  DimensionError);
}

TEST_CASE("gfgr_apply examples", "[superop][gfgr]") {
  Rng rng(9);
  const EnergyBasis basis(random_energies(rng, 4));
  const CoarseGrainedL L = build_coarse_grained_L(CouplingOperator(random_hermitian(rng, 4)),
                                                  basis, CoarseGrainingParams(1.3));
  CHECK(max_abs(gfgr_apply(L, Matrix::Identity(4, 4) / 4.0)) <= 1e-16);

  Matrix diag_h = Matrix::Zero(3, 3);
  diag_h.diagonal() << 0.3, -1.0, 2.0;
  const CoarseGrainedL Ld =
      build_coarse_grained_L(CouplingOperator(diag_h), EnergyBasis({0.0, 1.0, 2.0}),
                             CoarseGrainingParams(1.0));
  Matrix rho = Matrix::Zero(3, 3);
  rho.diagonal() << 0.2, 0.5, 0.3;
  CHECK(max_abs(gfgr_apply(Ld, rho)) == 0.0);

  // L = [[0, l], [l, 0]], rho = |0><0|: L rho L = l^2 |1><1|, {L^2, rho} = 2 l^2 |0><0|
  const CoarseGrainedL L2 = build_coarse_grained_L(CouplingOperator(off_diagonal_pair(0.1)),
                                                   EnergyBasis({0.0, 1.0}),
                                                   CoarseGrainingParams(2.0));
  const double l = L2.matrix(0, 1).real();
  Matrix r0 = Matrix::Zero(2, 2);
  r0(0, 0) = 1.0;
  const Matrix out = gfgr_apply(L2, r0);
  CHECK_THAT(out(0, 0).real(), WithinAbs(-l * l, 1e-16));
  CHECK_THAT(out(1, 1).real(), WithinAbs(l * l, 1e-16));
  CHECK(std::abs(out(0, 1)) <= 1e-17);
}

TEST_CASE("gfgr_apply invariants", "[superop][gfgr][property]") {
  Rng rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 5);
    const EnergyBasis basis(random_energies(rng, std::size_t(dim)));
    const CoarseGrainedL L = build_coarse_grained_L(CouplingOperator(random_hermitian(rng, dim)),
                                                    basis,
                                                    CoarseGrainingParams(uniform(rng, 0.5, 8.0)));
    const Matrix rho = random_state(rng, dim);
    const Matrix out = gfgr_apply(L, rho);
    REQUIRE(std::abs(out.trace()) <= 1e-13);
    REQUIRE(hermiticity_defect(out) <= 1e-13);
    const Matrix& l = L.matrix;
    const Matrix lindblad = l * rho * l - 0.5 * (l * l * rho + rho * l * l);
    REQUIRE(max_abs(out - lindblad) <= 1e-14 * std::max(1.0, max_abs(l * l)));
  }
}

TEST_CASE("gfgr rate tensor closed form and factorization", "[superop][rates]") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 7);
    const std::vector<double> e = random_energies(rng, std::size_t(dim));
    const Matrix hm = random_hermitian(rng, dim);
    const double t_bar = uniform(rng, 0.5, 8.0);
    const double hbar = uniform(rng, 0.5, 2.0);
    const CouplingOperator h(hm);
    const CoarseGrainingParams params(t_bar, hbar);
    const CoarseGrainedL L = build_coarse_grained_L(h, EnergyBasis(e), params);
    const RateTensor p = gfgr_rate_tensor(L);
    const RateTensor lit = rate_tensor_literal(hm, e, params.eps_bar(), hbar);
    const auto n = std::size_t(dim);
    double fact = 0.0;
    double closed = 0.0;
    double pairing = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t d = 0; d < n; ++d) {
            const Complex lf = L.matrix(Eigen::Index(a), Eigen::Index(c)) *
                               std::conj(L.matrix(Eigen::Index(b), Eigen::Index(d)));
            fact = std::max(fact, std::abs(p(a, b, c, d) - lf));
            closed = std::max(closed, std::abs(p(a, b, c, d) - lit(a, b, c, d)));
            pairing = std::max(pairing, std::abs(p(a, b, c, d) - std::conj(p(b, a, d, c))));
          }
    CHECK(fact <= 1e-12);
    CHECK(closed <= 1e-12);
    CHECK(pairing <= 1e-12);
  }
}

TEST_CASE("gfgr rate tensor examples", "[superop][rates]") {
  Rng rng(14);
  const std::vector<double> e{0.0, 0.4, 1.5};
  const EnergyBasis basis(e);
  const CoarseGrainingParams params(1.2);
  const Matrix hm = random_hermitian(rng, 3);
  const CouplingOperator h(hm);
  const RateTensor p = gfgr_rate_tensor(h, basis, params);

  const SemiclassicalRates diag = diagonal_rates(p, Smoothing::kGaussian, params.eps_bar());
  const SemiclassicalRates smooth = smoothed_fgr_rates(h, basis, params);
  CHECK((diag.rates - smooth.rates).cwiseAbs().maxCoeff() <= 1e-14);

  const RateTensor zero = gfgr_rate_tensor(CouplingOperator(Matrix::Zero(3, 3)), basis, params);
  for (const Complex& z : zero.entries()) CHECK(z == 0.0);

  const Matrix rho = random_state(rng, 3);
  const CoarseGrainedL L = build_coarse_grained_L(h, basis, params);
  CHECK(max_abs(rate_tensor_apply(p, rho) - gfgr_apply(L, rho)) <= 1e-12);
  CHECK(max_abs(in_out_assembly(p, rho) - gfgr_apply(L, rho)) <= 1e-12);
  CHECK_THROWS_AS(RateTensor(kRateTensorMaxDim + 1, RateKind::kGfgr), DimensionError);
}

TEST_CASE("smoothed FGR rates", "[superop][rates]") {
  const EnergyBasis degenerate({0.0, 0.0});
  const CouplingOperator h(off_diagonal_pair(0.3));
  for (double eps : {1.0, 0.5, 0.25}) {
    const SemiclassicalRates r =
        smoothed_fgr_rates(h, degenerate, CoarseGrainingParams::from_eps_bar(eps));
    CHECK_THAT(r.rates(0, 1), WithinRel(2.0 * kPi * 0.09 / (std::sqrt(2.0 * kPi) * eps), 1e-14));
  }
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 5);
    const EnergyBasis basis(random_energies(rng, std::size_t(dim)));
    const CouplingOperator hh(random_hermitian(rng, dim));
    const CoarseGrainingParams params(uniform(rng, 0.5, 4.0));
    const SemiclassicalRates r = smoothed_fgr_rates(hh, basis, params);
    const CoarseGrainedL L = build_coarse_grained_L(hh, basis, params);
    CHECK((r.rates - L.matrix.cwiseAbs2()).cwiseAbs().maxCoeff() <= 1e-13 * r.rates.maxCoeff());
    CHECK((r.rates - r.rates.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.rates.minCoeff() >= 0.0);
  }
}

TEST_CASE("smoothed FGR total rate on a quasi-continuum ladder", "[superop][rates]") {
  std::vector<double> e(201);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = (double(i) - 100.0) * 0.01;
  const CouplingOperator h(Matrix::Constant(201, 201, Complex(0.05, 0.0)));
  const SemiclassicalRates r =
      smoothed_fgr_rates(h, EnergyBasis(e), CoarseGrainingParams::from_eps_bar(0.1));
  const double golden = 2.0 * kPi * 0.05 * 0.05 / 0.01;
  CHECK_THAT(r.rates.row(100).sum(), WithinRel(golden, 0.01));
}

TEST_CASE("delta-regularized FGR rates", "[superop][rates]") {
  const CouplingOperator h(off_diagonal_pair(0.4));
  const double eta = 0.3;
  const SemiclassicalRates peak = fgr_rates(h, EnergyBasis({1.0, 1.0}), eta);
  CHECK_THAT(peak.rates(0, 1), WithinRel(2.0 * kPi * 0.16 / (std::sqrt(2.0 * kPi) * eta), 1e-14));
  const SemiclassicalRates tail = fgr_rates(h, EnergyBasis({0.0, 41.0 * eta}), eta);
  CHECK(tail.rates(0, 1) < 1e-300);
  CHECK_THROWS_AS(fgr_rates(h, EnergyBasis({0.0, 1.0}), 0.0), ParameterError);
  CHECK_THROWS_AS(fgr_rates(h, EnergyBasis({0.0, 1.0}), -1.0), ParameterError);

  // width matching: eta = eps_bar makes both Gaussians identical
  Rng rng(16);
  const EnergyBasis basis(random_energies(rng, 5));
  const CouplingOperator hh(random_hermitian(rng, 5));
  const CoarseGrainingParams params(1.7);
  const SemiclassicalRates smooth = smoothed_fgr_rates(hh, basis, params);
  const SemiclassicalRates fgr = fgr_rates(hh, basis, params.eps_bar());
  CHECK((smooth.rates - fgr.rates).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("conventional kernel", "[superop][kernel]") {
  Rng rng(17);
  const std::vector<double> e{0.0, 0.7, 1.9};
  const EnergyBasis basis(e);
  const Matrix hm = random_hermitian(rng, 3);
  const CouplingOperator h(hm);
  for (double elapsed : {0.3, 2.0, 11.0}) {
    const double hbar = 0.9;
    const ConventionalKernel k = conventional_kernel(h, basis, elapsed, hbar);
    CHECK(hermiticity_defect(k.matrix) <= 1e-10);
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK_THAT(k.matrix(i, i).real(), WithinRel(2.0 * hm(i, i).real() / hbar * elapsed, 1e-14));
      for (Eigen::Index j = 0; j < 3; ++j) {
        const double gap = e[std::size_t(i)] - e[std::size_t(j)];
        const Complex quad = 2.0 * hm(i, j) / hbar * phase_integral_by_quadrature(gap, elapsed, hbar);
        CHECK(std::abs(k.matrix(i, j) - quad) <= 1e-10 * std::max(1.0, std::abs(quad)));
        if (i != j) {
          const double w = gap / hbar;
          const double mag = 2.0 * std::abs(hm(i, j)) / hbar * std::abs(2.0 * std::sin(w * elapsed / 2.0) / w);
          CHECK_THAT(std::abs(k.matrix(i, j)), WithinRel(mag, 1e-12));
        }
      }
    }
  }
  // off-shell entries stay bounded for long elapsed times
  for (double elapsed : {1e2, 1e4, 1e6}) {
    const ConventionalKernel k = conventional_kernel(h, basis, elapsed);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double gap = std::abs(e[std::size_t(i)] - e[std::size_t(j)]);
        CHECK(std::abs(k.matrix(i, j)) <= 4.0 * std::abs(hm(i, j)) / gap * (1.0 + 1e-12));
      }
  }
  CHECK_THROWS_AS(conventional_kernel(h, basis, 0.0), ParameterError);
}

TEST_CASE("conventional_apply examples", "[superop][conventional]") {
  Rng rng(18);
  const EnergyBasis basis(random_energies(rng, 3));
  const CouplingOperator h(random_hermitian(rng, 3));
  const ConventionalKernel k = completed_collision_kernel(h, basis, 0.4);
  CHECK(max_abs(conventional_apply(h, k, Matrix::Identity(3, 3) / 3.0)) <= 1e-16);
  const CouplingOperator zero(Matrix::Zero(3, 3));
  const ConventionalKernel kz = completed_collision_kernel(zero, basis, 0.4);
  CHECK(max_abs(conventional_apply(zero, kz, random_state(rng, 3))) == 0.0);
}

TEST_CASE("conventional generator differs from GFGR in the population-coherence block",
          "[superop][conventional]") {
  const EnergyBasis basis({0.0, 1.0});
  Matrix hm = off_diagonal_pair(0.1);
  hm(0, 0) = 0.05;
  const CouplingOperator h(hm);
  const CoarseGrainingParams params(2.0);
  const CoarseGrainedL L = build_coarse_grained_L(h, basis, params);
  const ConventionalKernel k = completed_collision_kernel(h, basis, params.eps_bar());
  const Matrix conv = superop_by_columns([&](const Matrix& r) { return conventional_apply(h, k, r); }, 2);
  const Matrix gfgr = superop_by_columns([&](const Matrix& r) { return gfgr_apply(L, r); }, 2);
  const Matrix diff = conv - gfgr;
  // vec indices: 0 -> (0,0), 1 -> (1,0), 2 -> (0,1), 3 -> (1,1)
  double pop_coh = 0.0;
  for (Eigen::Index r : {0, 3})
    for (Eigen::Index c : {1, 2}) pop_coh = std::max(pop_coh, std::abs(diff(r, c)));
  double coh_pop = 0.0;
  for (Eigen::Index r : {1, 2})
    for (Eigen::Index c : {0, 3}) coh_pop = std::max(coh_pop, std::abs(diff(r, c)));
  CHECK(std::max(pop_coh, coh_pop) > 1e-6);
}

TEST_CASE("conventional_apply invariants", "[superop][conventional][property]") {
  Rng rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 5);
    const EnergyBasis basis(random_energies(rng, std::size_t(dim)));
    const CouplingOperator h(random_hermitian(rng, dim));
    const ConventionalKernel k =
        (trial % 2) ? completed_collision_kernel(h, basis, uniform(rng, 0.1, 1.0))
                    : conventional_kernel(h, basis, uniform(rng, 0.1, 5.0));
    const Matrix out = conventional_apply(h, k, random_state(rng, dim));
    REQUIRE(std::abs(out.trace()) <= 1e-13);
    REQUIRE(hermiticity_defect(out) <= 1e-13);
  }
}

TEST_CASE("conventional rate tensor", "[superop][rates][conventional]") {
  Rng rng(20);
  // fully degenerate spectrum: width-matched tensors coincide
  const EnergyBasis flat({0.3, 0.3, 0.3});
  const Matrix hm = random_hermitian(rng, 3);
  const CouplingOperator h(hm);
  const CoarseGrainingParams params(0.8);
  const RateTensor conv = conventional_rate_tensor(h, flat, params.eps_bar());
  const RateTensor gf = gfgr_rate_tensor(h, flat, params);
  double d = 0.0;
  for (std::size_t i = 0; i < conv.entries().size(); ++i)
    d = std::max(d, std::abs(conv.entries()[i] - gf.entries()[i]));
  CHECK(d <= 1e-14);

  // diagonal selection reproduces the delta-regularized FGR rates
  const EnergyBasis basis({0.0, 0.5, 1.6});
  const double eta = 0.35;
  const RateTensor c = conventional_rate_tensor(h, basis, eta);
  const SemiclassicalRates diag = diagonal_rates(c, Smoothing::kDelta, eta);
  CHECK((diag.rates - fgr_rates(h, basis, eta).rates).cwiseAbs().maxCoeff() <= 1e-14);

  // asymmetry: entries that differ from the L-factorized value
  const CoarseGrainedL L = build_coarse_grained_L(h, basis, CoarseGrainingParams::from_eps_bar(eta));
  const RateTensor g = gfgr_rate_tensor(L);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.entries().size(); ++i)
    worst = std::max(worst, std::abs(c.entries()[i] - g.entries()[i]));
  CHECK(worst > 1e-3);
  CHECK(std::abs(c(0, 1, 1, 1) - std::conj(c(1, 0, 1, 1))) > 1e-6);

  // the equation of motion built from the conventional tensor is the
  // completed-collision double commutator
  const ConventionalKernel k = completed_collision_kernel(h, basis, eta);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rho = random_state(rng, 3);
    CHECK(max_abs(rate_tensor_apply(c, rho) - conventional_apply(h, k, rho)) <= 1e-12);
    CHECK(max_abs(in_out_assembly(c, rho) - conventional_apply(h, k, rho)) <= 1e-12);
  }
  CHECK_THROWS_AS(conventional_rate_tensor(h, basis, 0.0), ParameterError);
}

TEST_CASE("Boltzmann right-hand side", "[superop][boltzmann]") {
  SemiclassicalRates sym;
  sym.rates = RealMatrix::Constant(4, 4, 0.7);
  CHECK(boltzmann_rhs(sym, RealVector::Constant(4, 0.25)).cwiseAbs().maxCoeff() <= 1e-16);

  SemiclassicalRates two;
  two.rates = RealMatrix::Zero(2, 2);
  two.rates(0, 1) = two.rates(1, 0) = 0.3;
  RealVector f(2);
  f << 1.0, 0.0;
  const RealVector df = boltzmann_rhs(two, f);
  CHECK_THAT(df(0), WithinAbs(-0.3, 1e-16));
  CHECK_THAT(df(1), WithinAbs(0.3, 1e-16));

  RealVector negative(2);
  negative << 1.1, -0.1;
  CHECK_THROWS_AS(boltzmann_rhs(two, negative), ValidationError);
  RealVector unnormalized(2);
  unnormalized << 0.6, 0.6;
  CHECK_THROWS_AS(boltzmann_rhs(two, unnormalized), ValidationError);
}

TEST_CASE("Boltzmann equals the GFGR diagonal on diagonal states", "[superop][boltzmann][property]") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto dim = static_cast<Eigen::Index>(2 + trial % 5);
    const EnergyBasis basis(random_energies(rng, std::size_t(dim)));
    const CouplingOperator h(random_hermitian(rng, dim));
    const CoarseGrainingParams params(uniform(rng, 0.5, 4.0));
    RealVector f = RealVector::Zero(dim);
    for (Eigen::Index i = 0; i < dim; ++i) f(i) = uniform(rng, 0.0, 1.0);
    f /= f.sum();
    const Matrix rho = f.cast<Complex>().asDiagonal();
    const Matrix drho = gfgr_apply(build_coarse_grained_L(h, basis, params), rho);
    const RealVector df = boltzmann_rhs(smoothed_fgr_rates(h, basis, params), f);
    CHECK((drho.diagonal().real() - df).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(df.sum()) <= 1e-13);
  }
}

TEST_CASE("Boltzmann propagation stays a probability vector", "[superop][boltzmann][property]") {
  Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index dim = 3 + trial;
    SemiclassicalRates r;
    r.rates = RealMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j)
        if (i != j) r.rates(i, j) = uniform(rng, 0.0, 1.0);
    RealVector f = RealVector::Zero(dim);
    f(0) = 1.0;
    const double dt = 0.2 / r.rates.colwise().sum().maxCoeff();
    for (int step = 0; step < 10000; ++step) {
      f += dt * boltzmann_rhs(r, f, 1e-10);
      REQUIRE(f.minCoeff() >= -1e-12);
      REQUIRE(std::abs(f.sum() - 1.0) <= 1e-10);
    }
  }
}
