#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "corrlab/commands.hpp"
#include "corrlab/config.hpp"
#include "corrlab/corrspec.hpp"
#include "corrlab/dynamics.hpp"
#include "corrlab/operators.hpp"
#include "corrlab/pauli.hpp"
#include "corrlab/states.hpp"

namespace corrlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
  double time_budget = 0.0;  // 0 = none
  std::string detail;
};

struct AcceptanceOptions {
  std::size_t threads = 1;
  // Propagator p^2 multiplier for the dynamics criteria. Anything but 1 is the
  // tampered convention used as a negative control.
  double dispersion_scale = 1.0;
};

namespace acceptance {

using Clock = std::chrono::steady_clock;

inline double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

inline CriterionResult start(int id, std::string name, double measured, double tolerance) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tolerance;
  return r;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct ChirpParams {
  double alpha;
  double beta;
};

inline const std::vector<double>& dynamics_betas() {
  static const std::vector<double> b = {-1.0, 0.0, 1.0};
  return b;
}

inline SpatialGrid dynamics_grid() { return make_grid(1024, 120.0); }

inline std::vector<TrajectoryRecord> dynamics_runs(const AcceptanceOptions& o) {
  const SpatialGrid g = dynamics_grid();
  TrackOptions t;
  t.threads = o.threads;
  t.evolve.dispersion_scale = o.dispersion_scale;
  std::vector<TrajectoryRecord> out;
  for (double b : dynamics_betas()) out.push_back(track(gaussian(g, 0.0, 0.0, 1.0, b), linspace(0.0, 4.0, 41), t));
  return out;
}

inline CriterionResult correlation_growth(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  CriterionResult r = start(1, "correlation growth law <C>(t) = <C>(0) + 2<H>t", 0.0, 1e-7);
  for (const auto& rec : dynamics_runs(o)) r.measured = std::max(r.measured, correlation_law_residual(rec));
  r.seconds = since(t0);
  r.time_budget = 5.0;
  r.pass = r.measured <= r.tolerance && r.seconds < r.time_budget;
  r.detail = "beta in {-1,0,1}, 41 times over [0,4], n=1024 L=120";
  return r;
}

inline CriterionResult shrink_spread(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  CriterionResult r = start(2, "shrink/spread law <X^2>(t) closed form", 0.0, 1e-6);
  const auto runs = dynamics_runs(o);
  for (const auto& rec : runs) r.measured = std::max(r.measured, width_law_residual(rec, 1.0));
  const TrajectoryRecord& plus = runs[2];
  const ShrinkSpreadReport rep = shrink_spread_report(plus, 1.0);
  const double t_star = -plus.records.front().corr / (2.0 * plus.records.front().energy);
  const double t_err = std::abs(rep.min_width_time - t_star);
  r.seconds = since(t0);
  r.pass = r.measured <= r.tolerance && t_err <= 1e-3 && rep.sign_changes == 1;
  r.detail = "width minimum at " + fmt(rep.min_width_time) + " vs t* = " + fmt(t_star) + " (|err| " + fmt(t_err) +
             " <= 1e-3), sign changes " + std::to_string(rep.sign_changes);
  return r;
}

inline CriterionResult coherent_zero(const AcceptanceOptions&) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(512, 40.0);
  const StateVector s = gaussian(g, 0.0, 0.0, 1.0, 0.0);
  const double quad = std::abs(correlation_expectation(s));
  const double mat = std::abs(correlation_expectation_matrix(s));
  CriterionResult r = start(3, "unchirped Gaussian <C> = 0", quad, 1e-10);
  r.seconds = since(t0);
  r.pass = quad <= 1e-10 && mat <= 1e-8;
  r.detail = "quadrature " + fmt(quad) + " <= 1e-10, matrix " + fmt(mat) + " <= 1e-8";
  return r;
}

inline CriterionResult chirp_oracle(const AcceptanceOptions&) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(512, 40.0);
  CriterionResult r = start(4, "chirped Gaussian <C> = -hbar beta/(2 alpha)", 0.0, 1e-8);
  for (ChirpParams p : {ChirpParams{1, 1}, ChirpParams{1, -1}, ChirpParams{2, 1}}) {
    const StateVector s = gaussian(g, 0.0, 0.0, p.alpha, p.beta);
    const double expected = -g.hbar * p.beta / (2.0 * p.alpha);
    r.measured = std::max({r.measured, std::abs(correlation_expectation(s) - expected),
                           std::abs(correlation_expectation_matrix(s) - expected)});
  }
  r.seconds = since(t0);
  r.pass = r.measured <= r.tolerance;
  r.detail = "(alpha,beta) in {(1,1),(1,-1),(2,1)}, quadrature and matrix routes";
  return r;
}

inline std::vector<StateVector> uncertainty_probes(const SpatialGrid& g, bool gaussians_only) {
  std::vector<StateVector> out = {gaussian(g, 0, 0, 1, 0),  gaussian(g, 0, 0, 1, 1),   gaussian(g, 0, 0, 1, -1),
                                  gaussian(g, 0, 0, 2, 1),  gaussian(g, 1.0, 0.5, 1, 1), gaussian(g, -2.0, 1.0, 0.5, -0.3)};
  if (gaussians_only) return out;
  for (int k = 1; k <= 3; ++k) out.push_back(hermite_gaussian(g, k));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) out.push_back(random_state(g, seed, 1.0));
  return out;
}

inline CriterionResult schrodinger_bound(const AcceptanceOptions&) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(512, 40.0);
  CriterionResult r = start(5, "Schroedinger uncertainty bound", 0.0, -1e-9);
  double min_slack = 1e300, worst_saturation = 0.0;
  for (const auto& s : uncertainty_probes(g, false))
    min_slack = std::min(min_slack, uncertainty_from(detail::raw_moments(s, 0.0), g.hbar).relative_slack());
  for (const auto& s : uncertainty_probes(g, true))
    worst_saturation =
        std::max(worst_saturation, std::abs(uncertainty_from(detail::raw_moments(s, 0.0), g.hbar).relative_slack()));
  r.measured = min_slack;
  r.seconds = since(t0);
  r.pass = min_slack >= -1e-9 && worst_saturation <= 1e-6;
  r.detail = "min relative slack " + fmt(min_slack) + " >= -1e-9; Gaussian saturation " + fmt(worst_saturation) +
             " <= 1e-6";
  return r;
}

inline const std::vector<ChirpParams>& spectrum_probes() {
  static const std::vector<ChirpParams> p = {{1, 0}, {1, 1}, {1, -1}, {2, 1}};
  return p;
}

inline CriterionResult spectrum_consistency(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(2048, 40.0);
  const CGrid cg = make_cgrid(20.0, 1024);
  const CorrelationEigensystem eig = CorrelationEigensystem::compute(g, o.threads);
  TransformOptions topts;
  topts.threads = o.threads;
  CriterionResult r = start(6, "sigma(c) transform vs matrix route", 0.0, 0.05);
  double worst_total = 0.0;
  for (ChirpParams p : spectrum_probes()) {
    const SigmaCrossValidation cv = cross_validate_sigma(eig, gaussian(g, 0, 0, p.alpha, p.beta), cg, kDefaultBins, topts);
    r.measured = std::max(r.measured, cv.tv_distance);
    worst_total = std::max({worst_total, std::abs(cv.transform.total - 1.0), std::abs(cv.matrix.total - 1.0)});
  }
  r.seconds = since(t0);
  r.time_budget = 60.0;
  r.pass = r.measured <= r.tolerance && worst_total <= 0.01 && r.seconds < r.time_budget;
  r.detail = "n=2048, 32 bins; worst |total-1| " + fmt(worst_total) + " <= 0.01";
  return r;
}

inline CriterionResult conjugation_property(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(2048, 40.0);
  const CGrid cg = make_cgrid(20.0, 1024);
  TransformOptions topts;
  topts.threads = o.threads;
  CriterionResult r = start(7, "x- vs p-representation sigma, conj mirror", 0.0, 1e-3);
  double worst_rep = 0.0, worst_conj = 0.0;
  std::vector<StateVector> probes;
  for (ChirpParams p : spectrum_probes()) probes.push_back(gaussian(g, 0, 0, p.alpha, p.beta));
  probes.push_back(hermite_gaussian(g, 1));
  probes.push_back(random_state(g, 7, 1.0));
  for (const auto& s : probes) {
    worst_rep = std::max(worst_rep, conjugation_property_check(s, cg, topts));
    const CorrelationSpectrum a = correlation_transform(s, cg, topts);
    const CorrelationSpectrum b = correlation_transform(conjugate(s), cg, topts);
    worst_conj = std::max(worst_conj, max_mirror_difference(a, b));
  }
  r.measured = std::max(worst_rep, worst_conj);
  r.seconds = since(t0);
  r.pass = r.measured <= r.tolerance;
  r.detail = "representation " + fmt(worst_rep) + ", conjugate mirror " + fmt(worst_conj);
  return r;
}

struct AlgebraRow {
  std::string name;
  std::vector<double> residuals;  // n = 256, 512, 1024
};

inline std::vector<AlgebraRow> algebra_table() {
  const std::vector<std::size_t> sizes = {256, 512, 1024};
  const std::vector<double> poly = {0.3, -1.0, 0.5, 0.25};
  std::vector<AlgebraRow> rows;
  auto add = [&](const std::string& name, const std::function<double(const SpatialGrid&, const StateVector&)>& f) {
    AlgebraRow row{name, {}};
    for (std::size_t n : sizes) {
      const SpatialGrid g = make_grid(n, 40.0);
      row.residuals.push_back(f(g, gaussian(g, 0, 0, 1, 0)));
    }
    rows.push_back(std::move(row));
  };
  add("[X,P]-ih", [](const SpatialGrid& g, const StateVector& s) { return xp_commutator_residual(g, s); });
  for (int k = 1; k <= 2; ++k) {
    add("[X^" + std::to_string(k) + ",C]",
        [k](const SpatialGrid& g, const StateVector& s) { return ladder_residual(g, XPower{k}, s); });
    add("[P^" + std::to_string(k) + ",C]",
        [k](const SpatialGrid& g, const StateVector& s) { return ladder_residual(g, PPower{k}, s); });
  }
  for (int r = 0; r <= 3; ++r)
    for (int q = 0; r + q <= 3; ++q) {
      if (r + q == 0) continue;
      add("[D_" + std::to_string(r) + std::to_string(q) + ",C]",
          [r, q](const SpatialGrid& g, const StateVector& s) { return ladder_residual(g, DrsPair{r, q}, s); });
    }
  add("[F(X),P]", [&](const SpatialGrid& g, const StateVector& s) {
    return deriv_commutator_residual(g, poly, PolySide::FofX, s);
  });
  add("[G(P),X]", [&](const SpatialGrid& g, const StateVector& s) {
    return deriv_commutator_residual(g, poly, PolySide::GofP, s);
  });
  add("C-PX-ih/2", [](const SpatialGrid& g, const StateVector& s) { return zero_point_residual(g, s); });
  return rows;
}

inline CriterionResult algebra_residuals(const AcceptanceOptions&) {
  const auto t0 = Clock::now();
  CriterionResult r = start(8, "operator algebra residuals, decreasing in n", 0.0, 1e-6);
  bool all_small = true, all_decreasing = true;
  std::string non_decreasing;
  for (const auto& row : algebra_table()) {
    for (double v : row.residuals) {
      r.measured = std::max(r.measured, v);
      all_small = all_small && v <= 1e-6;
    }
    const bool dec = row.residuals[1] < row.residuals[0] && row.residuals[2] < row.residuals[1];
    if (!dec) {
      all_decreasing = false;
      if (!non_decreasing.empty()) non_decreasing += "; ";
      non_decreasing += row.name + " " + fmt(row.residuals[0]) + "/" + fmt(row.residuals[1]) + "/" +
                        fmt(row.residuals[2]);
    }
  }
  r.seconds = since(t0);
  r.pass = all_small && all_decreasing;
  r.detail = std::string("max residual <= 1e-6: ") + (all_small ? "yes" : "no") +
             "; strictly decreasing n=256/512/1024: " + (all_decreasing ? "yes" : "no (" + non_decreasing + ")");
  return r;
}

inline CriterionResult pauli_partner(const AcceptanceOptions& o) {
  const auto t0 = Clock::now();
  const SpatialGrid g = make_grid(512, 40.0);
  const StateVector ref = gaussian(g, 0, 0, 1, 1);
  SearchOptions so;
  so.seeds = SearchOptions::seed_range(100);
  so.max_iter = 5000;
  so.threads = o.threads;
  const PartnerSearchReport rep = find_partners(ref, so);
  const double oracle = std::pow(2.0, -0.25);
  CriterionResult r = start(9, "Pauli partner of the beta=1 chirp", 1.0, 1e-3);
  double best_dc = 0.0, best_err = 1.0;
  for (const auto& fs : rep.found) {
    if (!fs.partner) continue;
    const double fid_err = std::abs(fs.fidelity_to_reference - oracle);
    if (fid_err < r.measured) {
      r.measured = fid_err;
      best_dc = fs.discrimination.delta_mean_c;
      best_err = fs.errors.max();
    }
  }
  r.seconds = since(t0);
  r.time_budget = 120.0;
  r.pass = rep.partner_count >= 1 && r.measured <= 1e-3 && best_err <= 1e-6 && std::abs(best_dc - 1.0) <= 0.01 &&
           r.seconds < r.time_budget;
  r.detail = "partners " + std::to_string(rep.partner_count) + ", marginal error " + fmt(best_err) +
             ", |dC| " + fmt(best_dc) + " (1 +- 0.01), all discriminated: " +
             (rep.all_partners_discriminated ? "yes" : "no");
  return r;
}

inline std::string command_bytes(const CommandOutput& out) { return out.csv + out.report.dump(2); }

inline CriterionResult determinism(const AcceptanceOptions&) {
  const auto t0 = Clock::now();
  CriterionResult r = start(10, "byte-identical command outputs", 0.0, 0.0);
  struct Case {
    const char* name;
    std::function<CommandOutput(const RunConfig&)> run;
    std::vector<std::string> overrides;
  };
  const std::vector<Case> cases = {
      {"evolve", cmd_evolve, {}},
      {"spectrum", cmd_spectrum, {"grid.n=512", "spectrum.c_points=256"}},
      {"pauli", cmd_pauli, {"pauli.trials=20"}},
  };
  std::string mismatched;
  for (const auto& c : cases) {
    auto with_threads = [&](std::size_t threads) {
      std::vector<std::string> ov = c.overrides;
      ov.push_back("run.threads=" + std::to_string(threads));
      boost::property_tree::ptree tree;
      for (const auto& a : ov) apply_override(tree, a);
      return command_bytes(c.run(config_from_tree(tree)));
    };
    const std::string a = with_threads(1), b = with_threads(1), t = with_threads(3);
    if (a != b || a != t) {
      r.measured += 1.0;
      mismatched += std::string(mismatched.empty() ? "" : ", ") + c.name;
    }
  }
  r.seconds = since(t0);
  r.pass = r.measured == 0.0;
  r.detail = mismatched.empty() ? "evolve, spectrum (n=512), pauli (20 trials): 2 runs + 3 threads identical"
                                : "mismatch in " + mismatched;
  return r;
}

}  // namespace acceptance

inline constexpr int kCriterionCount = 10;

inline std::string criterion_title(int id) {
  static const char* titles[] = {"correlation growth law",        "shrink/spread law",
                                 "unchirped Gaussian <C> = 0",    "chirped Gaussian <C> oracle",
                                 "Schroedinger uncertainty bound", "sigma(c) transform vs matrix route",
                                 "x- vs p-representation sigma",  "operator algebra residuals",
                                 "Pauli partner of the beta=1 chirp", "byte-identical command outputs"};
  return id >= 1 && id <= kCriterionCount ? titles[id - 1] : "criterion " + std::to_string(id);
}

inline CriterionResult run_criterion(int id, const AcceptanceOptions& o = {}) {
  using namespace acceptance;
  switch (id) {
    case 1: return correlation_growth(o);
    case 2: return shrink_spread(o);
    case 3: return coherent_zero(o);
    case 4: return chirp_oracle(o);
    case 5: return schrodinger_bound(o);
    case 6: return spectrum_consistency(o);
    case 7: return conjugation_property(o);
    case 8: return algebra_residuals(o);
    case 9: return pauli_partner(o);
    case 10: return determinism(o);
    default: throw Error(ErrorKind::InvalidArgument, "no acceptance criterion " + std::to_string(id));
  }
}

/// Runs one criterion; a thrown library error is recorded as a failure.
inline CriterionResult run_criterion_guarded(int id, const AcceptanceOptions& o = {}) {
  try {
    return run_criterion(id, o);
  } catch (const std::exception& e) {
    CriterionResult r;
    r.id = id;
    r.name = criterion_title(id);
    r.detail = std::string("aborted: ") + e.what();
    return r;
  }
}

inline std::string format_criterion(const CriterionResult& r) {
  std::string line = std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + ". " + r.name +
                     ": measured " + acceptance::fmt(r.measured) + ", tolerance " + acceptance::fmt(r.tolerance) +
                     ", " + acceptance::fmt(r.seconds) + " s";
  if (r.time_budget > 0.0) line += " (budget " + acceptance::fmt(r.time_budget) + " s)";
  if (!r.detail.empty()) line += " | " + r.detail;
  return line;
}

inline json criterion_json(const CriterionResult& r) {
  return {{"id", r.id},           {"name", r.name},         {"measured", r.measured},
          {"tolerance", r.tolerance}, {"pass", r.pass},      {"seconds", r.seconds},
          {"time_budget", r.time_budget}, {"detail", r.detail}};
}

/// Acceptance suite as a command: exit code 2 iff any criterion fails.
inline CommandOutput cmd_check(const RunConfig& cfg, const std::vector<int>& only = {}) {
  AcceptanceOptions o;
  o.threads = cfg.threads;
  o.dispersion_scale = cfg.evolve.dispersion_scale;
  CommandOutput out;
  out.report["config"] = config_echo(cfg, "check");
  json list = json::array();
  bool all = true;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const CriterionResult r = run_criterion_guarded(id, o);
    all = all && r.pass;
    list.push_back(criterion_json(r));
  }
  out.report["criteria"] = list;
  out.report["all_pass"] = all;
  out.exit_code = all ? 0 : 2;
  return out;
}

}  // namespace corrlab
