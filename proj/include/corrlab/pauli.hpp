#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "corrlab/corrspec.hpp"
#include "corrlab/detail/parallel.hpp"
#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/states.hpp"

namespace corrlab {

inline constexpr double kPartnerMarginalEps = 1e-6;
inline constexpr double kPartnerFidelityEps = 1e-3;

struct MarginalErrors {
  double rho = 0.0;
  double varpi = 0.0;
  double max() const { return std::max(rho, varpi); }
};

namespace detail {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline cplx unit_phase(cplx z) {
  const double r = std::abs(z);
  return r > 0.0 ? z / r : cplx{1.0, 0.0};
}

}  // namespace detail

/// Max-norm differences of the position and momentum densities.
inline MarginalErrors marginal_errors(const StateVector& a, const StateVector& b) {
  detail::require_same_grid(a.grid, b.grid);
  return {detail::max_abs_diff(position_density(a), position_density(b)),
          detail::max_abs_diff(momentum_density(a), momentum_density(b))};
}

inline double fidelity(const StateVector& a, const StateVector& b) {
  return std::abs(inner(in_position(a), in_position(b)));
}

/// Distinct rays with the same position and momentum densities.
inline bool is_partner(const StateVector& a, const StateVector& b, double eps_marginal = kPartnerMarginalEps,
                       double eps_fidelity = kPartnerFidelityEps) {
  const MarginalErrors e = marginal_errors(a, b);
  return e.rho <= eps_marginal && e.varpi <= eps_marginal && fidelity(a, b) <= 1.0 - eps_fidelity;
}

// ---------------------------------------------------------------------------
// Phase functions alpha(x), beta(p) with a = e^{i alpha(X)} b = e^{i beta(P)} b
// ---------------------------------------------------------------------------

struct PhaseData {
  std::vector<double> alpha_of_x;  // arg(a/b) in (-pi, pi], 0 where masked
  std::vector<double> beta_of_p;
  std::vector<bool> mask_x;  // true where |b| > threshold
  std::vector<bool> mask_p;
  double reconstruction_error_x = 0.0;
  double reconstruction_error_p = 0.0;
};

inline PhaseData extract_phases(const StateVector& a, const StateVector& b, double eps_marginal = kPartnerMarginalEps,
                                double mask_threshold = 1e-8) {
  const MarginalErrors e = marginal_errors(a, b);
  detail::require(e.max() <= eps_marginal, ErrorKind::NotPartner,
                  "extract_phases: marginals differ by " + std::to_string(e.max()));
  const StateVector ax = in_position(a), bx = in_position(b);
  const StateVector ap = in_momentum(a), bp = in_momentum(b);
  const std::size_t n = ax.size();
  PhaseData out;
  out.alpha_of_x.assign(n, 0.0);
  out.beta_of_p.assign(n, 0.0);
  out.mask_x.assign(n, false);
  out.mask_p.assign(n, false);
  std::size_t unmasked_x = 0, unmasked_p = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(bx.amp[j]) > mask_threshold) {
      out.mask_x[j] = true;
      ++unmasked_x;
      out.alpha_of_x[j] = std::arg(ax.amp[j] / bx.amp[j]);
      out.reconstruction_error_x =
          std::max(out.reconstruction_error_x, std::abs(std::polar(1.0, out.alpha_of_x[j]) * bx.amp[j] - ax.amp[j]));
    }
    if (std::abs(bp.amp[j]) > mask_threshold) {
      out.mask_p[j] = true;
      ++unmasked_p;
      out.beta_of_p[j] = std::arg(ap.amp[j] / bp.amp[j]);
      out.reconstruction_error_p =
          std::max(out.reconstruction_error_p, std::abs(std::polar(1.0, out.beta_of_p[j]) * bp.amp[j] - ap.amp[j]));
    }
  }
  detail::require(unmasked_x >= 8 && unmasked_p >= 8, ErrorKind::InsufficientSupport,
                  "extract_phases: too few points above the mask threshold");
  return out;
}

/// e^{i alpha(X)} e^{-i beta(P)} s; a partner state is a fixed point of this map.
inline StateVector apply_phase_pair(const PhaseData& phases, const StateVector& s) {
  StateVector m = in_momentum(s);
  for (std::size_t k = 0; k < m.size(); ++k) m.amp[k] *= std::polar(1.0, -phases.beta_of_p[k]);
  StateVector x = to_position(m);
  for (std::size_t j = 0; j < x.size(); ++j) x.amp[j] *= std::polar(1.0, phases.alpha_of_x[j]);
  return x;
}

// ---------------------------------------------------------------------------
// Alternating modulus projections (Gerchberg-Saxton)
// ---------------------------------------------------------------------------

enum class RetrievalMethod {
  // plain error reduction: f <- P_x P_p f; the momentum modulus misfit never increases
  ErrorReduction,
  // the same projections applied to the Nesterov extrapolation f_k + (k-1)/(k+2) (f_k - f_{k-1})
  Accelerated,
};

inline const char* to_string(RetrievalMethod m) {
  return m == RetrievalMethod::ErrorReduction ? "error_reduction" : "accelerated";
}

struct RetrievalOptions {
  std::uint64_t seed = 1;
  std::size_t max_iter = 5000;
  double tol = 1e-8;
  RetrievalMethod method = RetrievalMethod::Accelerated;
  bool record_history = false;
};

struct RetrievalResult {
  StateVector state;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;  // L2 misfit || |psi~| - sqrt(varpi) ||
  MarginalErrors errors;
  std::vector<double> history;
};

inline std::vector<double> random_phases(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-std::numbers::pi, std::numbers::pi);
  std::vector<double> out(n);
  for (auto& v : out) v = uniform(rng);
  return out;
}

/// Searches for a state with |psi(x)|^2 = rho and |psi~(p)|^2 = varpi by
/// alternately imposing the two moduli. Initial phases are i.i.d. uniform from
/// the seed unless given. Non-convergence is reported, not thrown.
inline RetrievalResult gs_retrieve(const SpatialGrid& grid, const std::vector<double>& rho_target,
                                   const std::vector<double>& varpi_target, const RetrievalOptions& opts = {},
                                   const std::optional<std::vector<double>>& initial_phase = std::nullopt) {
  const std::size_t n = grid.n;
  detail::require(rho_target.size() == n && varpi_target.size() == n, ErrorKind::InvalidArgument,
                  "target densities must match the grid size");
  double mass_x = 0.0, mass_p = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    detail::require(rho_target[j] >= 0.0 && varpi_target[j] >= 0.0, ErrorKind::InvalidArgument,
                    "target densities must be nonnegative");
    mass_x += rho_target[j];
    mass_p += varpi_target[j];
  }
  detail::require(std::abs(mass_x * grid.dx() - 1.0) <= 1e-8 && std::abs(mass_p * grid.dp() - 1.0) <= 1e-8,
                  ErrorKind::InvalidArgument, "target densities must have unit mass");

  std::vector<double> mod_x(n), mod_p(n);
  for (std::size_t j = 0; j < n; ++j) {
    mod_x[j] = std::sqrt(rho_target[j]);
    mod_p[j] = std::sqrt(varpi_target[j]);
  }
  const std::vector<double> phase0 = initial_phase ? *initial_phase : random_phases(n, opts.seed);
  detail::require(phase0.size() == n, ErrorKind::InvalidArgument, "initial phase length must match the grid");

  StateVector f{grid, cvec(n), Representation::Position};
  for (std::size_t j = 0; j < n; ++j) f.amp[j] = std::polar(mod_x[j], phase0[j]);
  StateVector prev = f;

  RetrievalResult result;
  for (std::size_t it = 0;; ++it) {
    const StateVector fp = to_momentum(f);
    double misfit = 0.0, err_p = 0.0, err_x = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double m = std::abs(fp.amp[k]);
      misfit += (m - mod_p[k]) * (m - mod_p[k]);
      err_p = std::max(err_p, std::abs(m * m - varpi_target[k]));
      err_x = std::max(err_x, std::abs(std::norm(f.amp[k]) - rho_target[k]));
    }
    result.residual = std::sqrt(misfit * grid.dp());
    result.errors = {err_x, err_p};
    result.iterations = it;
    if (opts.record_history) result.history.push_back(result.residual);
    if (result.errors.max() <= opts.tol) {
      result.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;

    StateVector yp = fp;
    if (opts.method == RetrievalMethod::Accelerated && it >= 1) {
      const double momentum = static_cast<double>(it - 1) / static_cast<double>(it + 2);
      StateVector y = f;
      for (std::size_t j = 0; j < n; ++j) y.amp[j] += momentum * (f.amp[j] - prev.amp[j]);
      yp = to_momentum(y);
    }
    for (std::size_t k = 0; k < n; ++k) yp.amp[k] = mod_p[k] * detail::unit_phase(yp.amp[k]);
    StateVector g = to_position(yp);
    prev = std::move(f);
    f = std::move(g);
    for (std::size_t j = 0; j < n; ++j) f.amp[j] = mod_x[j] * detail::unit_phase(f.amp[j]);
  }
  result.state = std::move(f);
  return result;
}

inline RetrievalResult gs_retrieve(const StateVector& reference, const RetrievalOptions& opts = {}) {
  return gs_retrieve(reference.grid, position_density(reference), momentum_density(reference), opts);
}

// ---------------------------------------------------------------------------
// Discrimination and partner search
// ---------------------------------------------------------------------------

struct Discrimination {
  double delta_mean_c = 0.0;  // |<C>_a - <C>_b|
  double tv_sigma = 0.0;      // total variation between transform-route sigma densities
};

inline Discrimination discriminate(const CorrelationSpectrum& sa, const CorrelationSpectrum& sb, double corr_a,
                                   double corr_b) {
  detail::require(sa.cgrid == sb.cgrid, ErrorKind::InvalidArgument, "spectra on different c-grids");
  double tv = 0.0;
  for (std::size_t k = 0; k < sa.sigma.size(); ++k) tv += std::abs(sa.sigma[k] - sb.sigma[k]);
  return {std::abs(corr_a - corr_b), 0.5 * tv * sa.cgrid.spacing()};
}

inline Discrimination discriminate(const StateVector& a, const StateVector& b, const CGrid& cgrid,
                                   const TransformOptions& opts = {}) {
  detail::require_same_grid(a.grid, b.grid);
  return discriminate(correlation_transform(in_position(a), cgrid, opts),
                      correlation_transform(in_position(b), cgrid, opts), correlation_expectation(a),
                      correlation_expectation(b));
}

struct SearchOptions {
  std::vector<std::uint64_t> seeds;
  std::size_t max_iter = 5000;
  double tol = 1e-8;
  double eps_marginal = kPartnerMarginalEps;
  double eps_fidelity = kPartnerFidelityEps;
  double dedupe_fidelity = 1.0 - 1e-6;
  RetrievalMethod method = RetrievalMethod::Accelerated;
  std::size_t threads = 1;
  CGrid cgrid{};

  static std::vector<std::uint64_t> seed_range(std::size_t trials, std::uint64_t first = 1) {
    std::vector<std::uint64_t> out(trials);
    for (std::size_t i = 0; i < trials; ++i) out[i] = first + i;
    return out;
  }
};

struct TrialSummary {
  std::uint64_t seed = 0;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  MarginalErrors errors;
  double fidelity_to_reference = 0.0;
  int cluster = -1;  // index into PartnerSearchReport::found, -1 if not converged
};

struct FoundState {
  StateVector state;
  std::uint64_t seed = 0;  // first seed (in seed order) that reached this ray
  std::size_t members = 0;
  double fidelity_to_reference = 0.0;
  MarginalErrors errors;  // marginals against the reference
  bool partner = false;
  Discrimination discrimination;
  bool discriminated = false;
};

struct PartnerSearchReport {
  StateVector reference;
  SearchOptions options;
  std::size_t trials = 0;
  std::size_t converged = 0;
  std::vector<TrialSummary> trial_log;
  std::vector<FoundState> found;  // distinct rays modulo global phase
  std::size_t partner_count = 0;
  bool all_partners_discriminated = true;
  std::size_t counterexamples = 0;  // partners not separated by C at 10 eps
};

/// Runs gs_retrieve from every seed against the reference marginals, clusters
/// converged states modulo global phase (conjugates and reflections are kept
/// distinct), classifies each cluster with is_partner and records how well <C>
/// and sigma(c) separate it from the reference.
inline PartnerSearchReport find_partners(const StateVector& reference, const SearchOptions& opts) {
  require_interior(reference, "find_partners");
  const std::vector<double> rho = position_density(reference);
  const std::vector<double> varpi = momentum_density(reference);
  PartnerSearchReport rep;
  rep.reference = in_position(reference);
  rep.options = opts;
  rep.trials = opts.seeds.size();

  std::vector<RetrievalResult> results(opts.seeds.size());
  detail::parallel_for(opts.seeds.size(), opts.threads, [&](std::size_t i) {
    RetrievalOptions ro;
    ro.seed = opts.seeds[i];
    ro.max_iter = opts.max_iter;
    ro.tol = opts.tol;
    ro.method = opts.method;
    results[i] = gs_retrieve(reference.grid, rho, varpi, ro);
  });

  for (std::size_t i = 0; i < results.size(); ++i) {
    const RetrievalResult& r = results[i];
    TrialSummary t;
    t.seed = opts.seeds[i];
    t.converged = r.converged;
    t.iterations = r.iterations;
    t.residual = r.residual;
    t.errors = r.errors;
    t.fidelity_to_reference = fidelity(rep.reference, r.state);
    if (r.converged) {
      ++rep.converged;
      for (std::size_t c = 0; c < rep.found.size(); ++c) {
        if (fidelity(rep.found[c].state, r.state) >= opts.dedupe_fidelity) {
          t.cluster = static_cast<int>(c);
          ++rep.found[c].members;
          break;
        }
      }
      if (t.cluster < 0) {
        FoundState fs;
        fs.state = r.state;
        fs.seed = t.seed;
        fs.members = 1;
        fs.fidelity_to_reference = t.fidelity_to_reference;
        t.cluster = static_cast<int>(rep.found.size());
        rep.found.push_back(std::move(fs));
      }
    }
    rep.trial_log.push_back(t);
  }

  const CorrelationSpectrum ref_spec = correlation_transform(rep.reference, opts.cgrid);
  const double ref_corr = correlation_expectation(rep.reference);
  for (auto& fs : rep.found) {
    fs.errors = marginal_errors(rep.reference, fs.state);
    fs.partner = is_partner(rep.reference, fs.state, opts.eps_marginal, opts.eps_fidelity);
    if (!fs.partner) continue;
    ++rep.partner_count;
    fs.discrimination = discriminate(ref_spec, correlation_transform(fs.state, opts.cgrid), ref_corr,
                                     correlation_expectation(fs.state));
    fs.discriminated = fs.discrimination.delta_mean_c > 10.0 * opts.eps_marginal ||
                       fs.discrimination.tv_sigma > 10.0 * opts.eps_marginal;
    if (!fs.discriminated) {
      rep.all_partners_discriminated = false;
      ++rep.counterexamples;
    }
  }
  return rep;
}

}  // namespace corrlab
