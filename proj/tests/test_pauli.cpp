#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "corrlab/pauli.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace corrlab;

namespace {

const SpatialGrid& bench() {
  static const SpatialGrid g = make_grid(512, 40.0);
  return g;
}

const StateVector& chirp() {
  static const StateVector s = gaussian(bench(), 0.0, 0.0, 1.0, 1.0);
  return s;
}

const CGrid& cgrid() {
  static const CGrid c = make_cgrid(20.0, 1024);
  return c;
}

const PartnerSearchReport& chirp_search() {
  static const PartnerSearchReport rep = [] {
    SearchOptions o;
    o.seeds = SearchOptions::seed_range(100);
    o.threads = 4;
    o.cgrid = cgrid();
    return find_partners(chirp(), o);
  }();
  return rep;
}

double max_diff(const cvec& a, const cvec& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST(Partner, GlobalPhaseIsNotAPartner) {
  StateVector b = chirp();
  for (auto& a : b.amp) a *= std::polar(1.0, 0.7);
  EXPECT_NEAR(fidelity(chirp(), b), 1.0, 1e-12);
  EXPECT_FALSE(is_partner(chirp(), b));
}

TEST(Partner, ChirpConjugateIsAPartner) {
  const StateVector b = conjugate(chirp());
  const oracle::Gaussian og{1.0, 1.0};
  EXPECT_NEAR(fidelity(chirp(), b), og.conjugate_fidelity(), 1e-10);
  EXPECT_NEAR(og.conjugate_fidelity(), 0.8408964152537145, 1e-15);
  EXPECT_LE(marginal_errors(chirp(), b).max(), 1e-12);
  EXPECT_TRUE(is_partner(chirp(), b));
  EXPECT_TRUE(is_partner(b, chirp()));
}

TEST(Partner, TranslatedStateIsNotAPartner) {
  const StateVector b = translate(chirp(), 1.0);
  EXPECT_FALSE(is_partner(chirp(), b));
  EXPECT_FALSE(is_partner(b, chirp()));
}

TEST(Partner, RelationIsSymmetric) {
  const std::vector<StateVector> states{chirp(), conjugate(chirp()), random_state(bench(), 1, 1.0),
                                        conjugate(random_state(bench(), 1, 1.0)), gaussian(bench(), 0.0, 0.0, 1.0, 0.0)};
  for (const auto& a : states)
    for (const auto& b : states) EXPECT_EQ(is_partner(a, b), is_partner(b, a));
}

TEST(Phases, ChirpPairHasQuadraticPositionPhase) {
  const StateVector a = conjugate(chirp());
  const PhaseData ph = extract_phases(a, chirp());
  // a / b = exp(i beta x^2) with beta = 1
  for (std::size_t j = 0; j < bench().n; ++j) {
    if (!ph.mask_x[j]) continue;
    const double x = bench().x(j);
    EXPECT_LE(std::abs(std::polar(1.0, ph.alpha_of_x[j]) - std::polar(1.0, x * x)), 1e-6) << x;
  }
  EXPECT_LE(ph.reconstruction_error_x, 1e-6);
  EXPECT_LE(ph.reconstruction_error_p, 1e-6);
}

TEST(Phases, IdenticalStatesHaveTrivialPhases) {
  const StateVector s = random_state(bench(), 4, 1.0);
  const PhaseData ph = extract_phases(s, s);
  for (std::size_t j = 0; j < bench().n; ++j) {
    if (ph.mask_x[j]) { EXPECT_NEAR(ph.alpha_of_x[j], 0.0, 1e-12); }
    if (ph.mask_p[j]) { EXPECT_NEAR(ph.beta_of_p[j], 0.0, 1e-12); }
  }
}

TEST(Phases, PartnerIsFixedPointOfPhasePair) {
  const StateVector a = conjugate(chirp());
  const PhaseData ph = extract_phases(a, chirp());
  EXPECT_LE(max_diff(apply_phase_pair(ph, a).amp, a.amp), 1e-6);
  // conjugation only gives a partner when the momentum density is even
  const StateVector r = normalized(parity_split(random_state(bench(), 5, 1.0)).even);
  const StateVector rc = conjugate(r);
  const PhaseData pr = extract_phases(rc, r);
  EXPECT_LE(max_diff(apply_phase_pair(pr, rc).amp, in_position(rc).amp), 1e-6);
}

TEST(Phases, Preconditions) {
  EXPECT_ERROR_KIND(extract_phases(chirp(), translate(chirp(), 1.0)), ErrorKind::NotPartner);
  EXPECT_ERROR_KIND(extract_phases(chirp(), conjugate(chirp()), kPartnerMarginalEps, 10.0),
                    ErrorKind::InsufficientSupport);
}

TEST(Retrieval, ExactPhasesConvergeImmediately) {
  const StateVector s = gaussian(bench(), 0.0, 0.0, 1.0, 0.0);
  std::vector<double> phase(bench().n);
  for (std::size_t j = 0; j < bench().n; ++j) phase[j] = std::arg(s.amp[j]);
  const RetrievalResult r = gs_retrieve(bench(), position_density(s), momentum_density(s), {}, phase);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0u);
}

TEST(Retrieval, ErrorReductionResidualNeverIncreases) {
  RetrievalOptions o;
  o.method = RetrievalMethod::ErrorReduction;
  o.seed = 3;
  o.max_iter = 400;
  o.record_history = true;
  const RetrievalResult r = gs_retrieve(chirp(), o);
  ASSERT_GT(r.history.size(), 10u);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1] + 1e-12) << i;
}

TEST(Retrieval, DeterministicForSeed) {
  RetrievalOptions o;
  o.seed = 17;
  o.max_iter = 200;
  const RetrievalResult a = gs_retrieve(chirp(), o);
  const RetrievalResult b = gs_retrieve(chirp(), o);
  EXPECT_EQ(a.state.amp, b.state.amp);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(random_phases(8, 5), random_phases(8, 5));
  EXPECT_NE(random_phases(8, 5), random_phases(8, 6));
}

TEST(Retrieval, ReportedErrorsMatchIndependentCheck) {
  const std::vector<double> rho = position_density(chirp());
  const std::vector<double> varpi = momentum_density(chirp());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RetrievalOptions o;
    o.seed = seed;
    const RetrievalResult r = gs_retrieve(bench(), rho, varpi, o);
    const std::vector<double> rx = position_density(r.state), rp = momentum_density(r.state);
    double ex = 0.0, ep = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
      ex = std::max(ex, std::abs(rx[j] - rho[j]));
      ep = std::max(ep, std::abs(rp[j] - varpi[j]));
    }
    EXPECT_NEAR(ex, r.errors.rho, 1e-14);
    EXPECT_NEAR(ep, r.errors.varpi, 1e-14);
  }
}

TEST(Retrieval, ChirpTargetsClusterOnTheTwoExactSolutions) {
  SearchOptions o;
  o.seeds = SearchOptions::seed_range(200);
  o.threads = 4;
  o.cgrid = cgrid();
  const PartnerSearchReport rep = find_partners(chirp(), o);
  const StateVector conj = conjugate(chirp());
  std::size_t near = 0;
  for (std::size_t c = 0; c < rep.found.size(); ++c) {
    const double f = std::max(fidelity(rep.found[c].state, chirp()), fidelity(rep.found[c].state, conj));
    if (f > 1.0 - 1e-4) near += rep.found[c].members;
  }
  RecordProperty("converged", static_cast<int>(rep.converged));
  RecordProperty("near_exact", static_cast<int>(near));
  EXPECT_GT(rep.converged, 0u);
  EXPECT_EQ(near, rep.converged);
}

TEST(Retrieval, UnitGaussianHasNoConjugatePartner) {
  SearchOptions o;
  o.seeds = SearchOptions::seed_range(20);
  o.threads = 4;
  o.cgrid = cgrid();
  const PartnerSearchReport rep = find_partners(gaussian(bench(), 0.0, 0.0, 1.0, 0.0), o);
  for (const TrialSummary& t : rep.trial_log)
    if (t.converged) { EXPECT_GT(t.fidelity_to_reference, 1.0 - 1e-4) << t.seed; }
  EXPECT_EQ(rep.partner_count, 0u);
}

TEST(Retrieval, RejectsInvalidTargets) {
  std::vector<double> rho = position_density(chirp());
  const std::vector<double> varpi = momentum_density(chirp());
  std::vector<double> doubled = rho;
  for (double& v : doubled) v *= 2.0;
  EXPECT_ERROR_KIND(gs_retrieve(bench(), doubled, varpi), ErrorKind::InvalidArgument);
  rho[10] = -1e-3;
  EXPECT_ERROR_KIND(gs_retrieve(bench(), rho, varpi), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(gs_retrieve(bench(), std::vector<double>(3, 0.0), varpi), ErrorKind::InvalidArgument);
}

TEST(Search, FindsConjugatePartner) {
  const PartnerSearchReport& rep = chirp_search();
  EXPECT_EQ(rep.trials, 100u);
  EXPECT_GE(rep.partner_count, 1u);
  bool conjugate_found = false;
  for (const FoundState& fs : rep.found) {
    EXPECT_GE(fs.fidelity_to_reference, 0.0);
    EXPECT_LE(fs.fidelity_to_reference, 1.0 + 1e-12);
    if (!fs.partner) continue;
    EXPECT_TRUE(is_partner(rep.reference, fs.state, rep.options.eps_marginal, rep.options.eps_fidelity));
    if (fidelity(fs.state, conjugate(chirp())) > 1.0 - 1e-3) {
      conjugate_found = true;
      EXPECT_NEAR(fs.discrimination.delta_mean_c, 1.0, 0.01);
      EXPECT_GT(fs.discrimination.tv_sigma, 0.1);
    }
  }
  EXPECT_TRUE(conjugate_found);
  RecordProperty("counterexamples", static_cast<int>(rep.counterexamples));
}

TEST(Search, ClustersAreDistinctRays) {
  const PartnerSearchReport& rep = chirp_search();
  for (std::size_t a = 0; a < rep.found.size(); ++a)
    for (std::size_t b = a + 1; b < rep.found.size(); ++b)
      EXPECT_LT(fidelity(rep.found[a].state, rep.found[b].state), rep.options.dedupe_fidelity);
  std::size_t members = 0;
  for (const FoundState& fs : rep.found) members += fs.members;
  EXPECT_EQ(members, rep.converged);
}

TEST(Search, ThreadCountDoesNotChangeReport) {
  SearchOptions o;
  o.seeds = SearchOptions::seed_range(12, 40);
  o.cgrid = make_cgrid(20.0, 256);
  const PartnerSearchReport a = find_partners(chirp(), o);
  o.threads = 4;
  const PartnerSearchReport b = find_partners(chirp(), o);
  ASSERT_EQ(a.trial_log.size(), b.trial_log.size());
  for (std::size_t i = 0; i < a.trial_log.size(); ++i) {
    EXPECT_EQ(a.trial_log[i].seed, b.trial_log[i].seed);
    EXPECT_EQ(a.trial_log[i].iterations, b.trial_log[i].iterations);
    EXPECT_EQ(a.trial_log[i].residual, b.trial_log[i].residual);
    EXPECT_EQ(a.trial_log[i].cluster, b.trial_log[i].cluster);
  }
  ASSERT_EQ(a.found.size(), b.found.size());
  for (std::size_t c = 0; c < a.found.size(); ++c) EXPECT_EQ(a.found[c].state.amp, b.found[c].state.amp);
}

TEST(Discriminate, IdenticalStates) {
  const Discrimination d = discriminate(chirp(), chirp(), cgrid());
  EXPECT_LE(d.delta_mean_c, 1e-10);
  EXPECT_LE(d.tv_sigma, 1e-10);
}

TEST(Discriminate, ChirpPair) {
  const Discrimination d = discriminate(chirp(), conjugate(chirp()), cgrid());
  EXPECT_NEAR(d.delta_mean_c, 1.0, 0.01);
  EXPECT_GT(d.tv_sigma, 0.1);
}

TEST(Discriminate, ConjugationMirrorsSigma) {
  for (const StateVector& s : {chirp(), random_state(bench(), 2, 1.0)}) {
    const CorrelationSpectrum a = correlation_transform(s, cgrid());
    const CorrelationSpectrum b = correlation_transform(conjugate(s), cgrid());
    EXPECT_LE(max_mirror_difference(a, b), 1e-3);
  }
}
