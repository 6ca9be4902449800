#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "corrlab/states.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace corrlab;

namespace {

const SpatialGrid& bench() {
  static const SpatialGrid g = make_grid(512, 40.0);
  return g;
}

double integrate(const std::vector<double>& d, double step) {
  double acc = 0.0;
  for (double v : d) acc += v * step;
  return acc;
}

std::vector<StateVector> probe_set() {
  const SpatialGrid& g = bench();
  return {gaussian(g, 0.0, 0.0, 1.0, 0.0),  gaussian(g, 0.0, 0.0, 1.0, 1.0), gaussian(g, 0.0, 0.0, 2.0, -0.7),
          gaussian(g, 1.5, 0.8, 0.6, 0.4),  hermite_gaussian(g, 1),          hermite_gaussian(g, 3, 1.4),
          random_state(g, 1, 1.0),          random_state(g, 7, 1.5)};
}

// Re sum conj(psi) x (-i hbar psi') dx with psi' = -(alpha + i beta) x psi taken analytically.
double chirp_corr_quadrature(const oracle::Gaussian& og, const SpatialGrid& g) {
  double acc = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double x = g.x(j);
    const cplx psi = og(x);
    const cplx dpsi = -cplx{og.alpha, og.beta} * x * psi;
    acc += (std::conj(psi) * x * cplx{0.0, -og.hbar} * dpsi).real();
  }
  return acc * g.dx();
}

}  // namespace

TEST(Gaussian, CoherentStateHasZeroCorrelation) {
  const MomentRecord r = moments(gaussian(bench(), 0.0, 0.0, 1.0, 0.0));
  EXPECT_NEAR(r.corr, 0.0, 1e-10);
  const oracle::Gaussian og;
  EXPECT_NEAR(r.var_x, og.var_x(), 1e-12);
  EXPECT_NEAR(r.var_p, og.var_p(), 1e-12);
  EXPECT_NEAR(r.energy, og.energy(), 1e-8);
}

TEST(Gaussian, ChirpSetsCorrelation) {
  const oracle::Gaussian og{1.0, 1.0};
  EXPECT_NEAR(chirp_corr_quadrature(og, bench()), og.corr(), 1e-12) << "oracle sanity";
  const StateVector s = gaussian(bench(), 0.0, 0.0, og.alpha, og.beta);
  const MomentRecord r = moments(s);
  EXPECT_NEAR(r.corr, -0.5, 1e-8);
  EXPECT_NEAR(r.var_p, og.var_p(), 1e-10);
  EXPECT_NEAR(correlation_expectation_matrix(s), -0.5, 1e-8);
}

TEST(Gaussian, ChirpFamilyMatchesClosedForms) {
  for (double alpha : {0.5, 1.0, 2.0})
    for (double beta : {-1.5, 0.0, 0.6}) {
      const oracle::Gaussian og{alpha, beta, 0.8};
      const SpatialGrid g = make_grid(512, 40.0, og.hbar);
      const MomentRecord r = moments(gaussian(g, 0.0, 0.0, alpha, beta));
      EXPECT_NEAR(r.corr, og.corr(), 1e-9) << alpha << " " << beta;
      EXPECT_NEAR(r.var_x, og.var_x(), 1e-10);
      EXPECT_NEAR(r.var_p, og.var_p(), 1e-9);
    }
}

TEST(Gaussian, RejectsBadInput) {
  EXPECT_ERROR_KIND(gaussian(bench(), 0.0, 0.0, 0.01, 0.0), ErrorKind::SupportViolation);
  EXPECT_ERROR_KIND(gaussian(bench(), 18.0, 0.0, 1.0, 0.0), ErrorKind::SupportViolation);
  EXPECT_ERROR_KIND(gaussian(bench(), 0.0, 0.0, -1.0, 0.0), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(gaussian(bench(), 0.0, 0.0, 1.0, std::nan("")), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(hermite_gaussian(bench(), -1), ErrorKind::InvalidArgument);
}

TEST(RandomState, DeterministicAndDistinct) {
  const StateVector a = random_state(bench(), 11, 1.0);
  const StateVector b = random_state(bench(), 11, 1.0);
  const StateVector c = random_state(bench(), 12, 1.0);
  EXPECT_EQ(a.amp, b.amp);
  EXPECT_LT(std::abs(inner(a, c)), 1.0 - 1e-6);
  EXPECT_NEAR(a.norm_squared(), 1.0, 1e-12);
  EXPECT_TRUE(is_interior_supported(a));
  EXPECT_ERROR_KIND(random_state(bench(), 1, 0.0), ErrorKind::InvalidArgument);
}

TEST(Densities, UnitGaussianPositionDensity) {
  const SpatialGrid g = make_grid(256, 40.0);
  const std::vector<double> rho = position_density(gaussian(g, 0.0, 0.0, 1.0, 0.0));
  double worst = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    worst = std::max(worst, std::abs(rho[j] - std::exp(-g.x(j) * g.x(j)) / std::sqrt(std::numbers::pi)));
  EXPECT_LE(worst, 1e-10);
  EXPECT_NEAR(integrate(rho, g.dx()), 1.0, 1e-10);
}

TEST(Densities, NonnegativeAndNormalized) {
  for (const StateVector& s : probe_set()) {
    const std::vector<double> rho = position_density(s);
    const std::vector<double> varpi = momentum_density(s);
    for (std::size_t j = 0; j < rho.size(); ++j) {
      EXPECT_GE(rho[j], 0.0);
      EXPECT_GE(varpi[j], 0.0);
    }
    EXPECT_NEAR(integrate(rho, s.grid.dx()), 1.0, 1e-10);
    EXPECT_NEAR(integrate(varpi, s.grid.dp()), 1.0, 1e-10);
  }
}

TEST(Densities, ConjugationMirrorsMomentum) {
  for (const StateVector& s : probe_set()) {
    const std::vector<double> varpi = momentum_density(s);
    const std::vector<double> mirrored = momentum_density(conjugate(s));
    const std::size_t n = varpi.size();
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(mirrored[k], varpi[n - 1 - k], 1e-10);
  }
}

TEST(Moments, MatrixAndQuadratureCorrelationAgree) {
  for (const StateVector& s : probe_set())
    EXPECT_NEAR(correlation_expectation(s), correlation_expectation_matrix(s), 1e-8);
}

TEST(Moments, InvariantsHoldOnProbeSet) {
  for (const StateVector& s : probe_set()) {
    const MomentRecord r = moments(s, 0.25);
    EXPECT_EQ(r.t, 0.25);
    EXPECT_GT(r.var_x, 0.0);
    EXPECT_GT(r.var_p, 0.0);
    EXPECT_GE(r.energy, 0.0);
    EXPECT_NEAR(r.covariance, r.corr - r.mean_x * r.mean_p, 1e-15);
    EXPECT_GE(r.var_x * r.var_p - r.covariance * r.covariance, 0.25 * (1.0 - 1e-9));
  }
}

TEST(Moments, EvenStatesAreCentred) {
  for (const StateVector& s : {gaussian(bench(), 0.0, 0.0, 1.3, 0.9), hermite_gaussian(bench(), 2)}) {
    const MomentRecord r = moments(s);
    EXPECT_NEAR(r.mean_x, 0.0, 1e-10);
    EXPECT_NEAR(r.mean_p, 0.0, 1e-10);
  }
}

TEST(Moments, ConjugationFlipsCorrelation) {
  for (const StateVector& s : probe_set()) EXPECT_NEAR(moments(conjugate(s)).corr, -moments(s).corr, 1e-9);
}

TEST(Moments, TranslationCovariance) {
  const double a = 2.25;
  for (const StateVector& s : {gaussian(bench(), 0.0, 0.3, 1.0, 0.5), random_state(bench(), 3, 1.0)}) {
    const MomentRecord r0 = moments(s);
    const MomentRecord ra = moments(translate(s, a));
    EXPECT_NEAR(ra.mean_x, r0.mean_x + a, 1e-9);
    EXPECT_NEAR(ra.var_x, r0.var_x, 1e-9);
    EXPECT_NEAR(ra.mean_p, r0.mean_p, 1e-9);
    EXPECT_NEAR(ra.var_p, r0.var_p, 1e-9);
  }
}

// Any real-valued wavefunction has <C> = 0, coherent or not.
TEST(Moments, RealWavefunctionsHaveZeroCorrelation) {
  for (int order : {1, 2, 5}) EXPECT_NEAR(moments(hermite_gaussian(bench(), order)).corr, 0.0, 1e-10);
}

TEST(Uncertainty, ChirpedGaussianSaturates) {
  const oracle::Gaussian og{1.0, 1.0};
  const UncertaintyCheck u = schrodinger_uncertainty(gaussian(bench(), 0.0, 0.0, og.alpha, og.beta));
  const double lhs = og.var_x() * og.var_p();
  EXPECT_NEAR(lhs, 0.5, 1e-15);
  EXPECT_NEAR(u.lhs, lhs, 1e-9);
  EXPECT_NEAR(u.rhs, 0.25 + og.corr() * og.corr(), 1e-9);
  EXPECT_TRUE(u.saturated);
}

TEST(Uncertainty, CoherentStateIsMinimal) {
  const UncertaintyCheck u = schrodinger_uncertainty(gaussian(bench(), 0.0, 0.0, 1.0, 0.0));
  EXPECT_NEAR(u.lhs, 0.25, 1e-10);
  EXPECT_NEAR(u.rhs, 0.25, 1e-10);
  EXPECT_TRUE(u.saturated);
}

TEST(Uncertainty, RandomStateIsStrict) {
  const UncertaintyCheck u = schrodinger_uncertainty(random_state(bench(), 7, 1.0));
  EXPECT_GT(u.lhs, u.rhs);
  EXPECT_FALSE(u.saturated);
}

TEST(Uncertainty, RequiresInteriorState) {
  cvec amp(bench().n);
  for (std::size_t j = 0; j < amp.size(); ++j) amp[j] = std::exp(-bench().x(j) * bench().x(j) / 100.0);
  EXPECT_ERROR_KIND(schrodinger_uncertainty(normalized(make_state(bench(), amp))), ErrorKind::SupportViolation);
}

TEST(ParitySplit, EvenAndOddStates) {
  const ParitySplit g = parity_split(gaussian(bench(), 0.0, 0.0, 1.0, 0.4));
  EXPECT_LE(g.odd_weight, 1e-12);
  const ParitySplit h = parity_split(hermite_gaussian(bench(), 1));
  EXPECT_LE(h.even_weight, 1e-12);
}

TEST(ParitySplit, WeightsAndOrthogonality) {
  for (const StateVector& s : probe_set()) {
    const ParitySplit p = parity_split(s);
    EXPECT_NEAR(p.even_weight + p.odd_weight, 1.0, 1e-12);
    EXPECT_LE(std::abs(inner(p.even, p.odd)), 1e-12);
    const StateVector pos = in_position(s);
    for (std::size_t j = 0; j < pos.size(); ++j) EXPECT_LE(std::abs(p.even.amp[j] + p.odd.amp[j] - pos.amp[j]), 1e-15);
  }
}
