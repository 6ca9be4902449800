#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "corrlab/config.hpp"
#include "corrlab/corrspec.hpp"
#include "corrlab/dynamics.hpp"
#include "corrlab/error.hpp"
#include "corrlab/pauli.hpp"
#include "corrlab/states.hpp"

namespace corrlab {

struct CommandOutput {
  std::string csv;  // empty for JSON-only commands
  json report;
  int exit_code = 0;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(std::initializer_list<double> values) {
  std::string line;
  for (double v : values) {
    if (!line.empty()) line += ',';
    line += format_double(v);
  }
  line += '\n';
  return line;
}

inline json moments_json(const MomentRecord& r) {
  return {{"t", r.t},         {"mean_x", r.mean_x},   {"mean_p", r.mean_p}, {"var_x", r.var_x},
          {"var_p", r.var_p}, {"mean_x2", r.mean_x2}, {"corr", r.corr},     {"energy", r.energy},
          {"covariance", r.covariance}};
}

inline json state_json(const StateVector& s) {
  const StateVector pos = in_position(s);
  std::vector<double> re(pos.size()), im(pos.size());
  for (std::size_t j = 0; j < pos.size(); ++j) {
    re[j] = pos.amp[j].real();
    im[j] = pos.amp[j].imag();
  }
  return {{"re", re}, {"im", im}};
}

inline StateVector state_from_json(const SpatialGrid& grid, const json& j) {
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  detail::require(re.size() == grid.n && im.size() == grid.n, ErrorKind::GridMismatch,
                  "stored amplitudes do not match the report grid");
  cvec amp(grid.n);
  for (std::size_t j2 = 0; j2 < grid.n; ++j2) amp[j2] = {re[j2], im[j2]};
  return StateVector{grid, std::move(amp), Representation::Position};
}

inline json errors_json(const MarginalErrors& e) { return {{"rho", e.rho}, {"varpi", e.varpi}}; }

// ---------------------------------------------------------------------------

inline CommandOutput cmd_evolve(const RunConfig& cfg) {
  const SpatialGrid grid = resolve_grid(cfg, "evolve");
  const StateVector s0 = make_configured_state(cfg, grid);
  TrackOptions opts;
  opts.threads = cfg.threads;
  opts.evolve.dispersion_scale = cfg.evolve.dispersion_scale;
  const TrajectoryRecord rec = track(s0, linspace(cfg.evolve.t_start, cfg.evolve.t_end, cfg.evolve.steps), opts);
  const ShrinkSpreadReport rep = shrink_spread_report(rec, grid.hbar);

  CommandOutput out;
  out.csv = "t,mean_x,mean_p,var_x,var_p,mean_x2,corr,energy,covariance,uncert_lhs,uncert_rhs\n";
  for (const auto& r : rec.records) {
    const UncertaintyCheck u = uncertainty_from(r, grid.hbar);
    out.csv += csv_row({r.t, r.mean_x, r.mean_p, r.var_x, r.var_p, r.mean_x2, r.corr, r.energy, r.covariance,
                        u.lhs, u.rhs});
  }
  const MomentRecord& r0 = rec.records.front();
  json& j = out.report;
  j["config"] = config_echo(cfg, "evolve");
  j["initial"] = moments_json(r0);
  j["fit"] = {{"x2_coeffs", rec.x2_fit.coeffs},
              {"x2_max_residual", rec.x2_fit.max_residual},
              {"corr_coeffs", rec.corr_fit.coeffs},
              {"corr_max_residual", rec.corr_fit.max_residual}};
  j["law25_slope"] = rec.corr_fit.coeffs[1];
  j["law25_expected_slope"] = 2.0 * r0.energy;
  j["law25_residual"] = correlation_law_residual(rec);
  j["law24_relative_residual"] = width_law_residual(rec, grid.mass);
  j["energy_drift"] = rec.energy_drift;
  j["var_p_drift"] = rec.var_p_drift;
  j["shrink_spread"] = {{"sign_changes", rep.sign_changes},
                        {"crossing_times", rep.crossing_times},
                        {"predicted_crossing", std::isfinite(rep.predicted_crossing) ? json(rep.predicted_crossing)
                                                                                    : json(nullptr)},
                        {"shrinking_initially", rep.shrinking_initially},
                        {"min_width_time", rep.min_width_time},
                        {"sample_argmin_time", rep.sample_argmin_time},
                        {"min_uncertainty_product", rep.min_uncertainty_product},
                        {"heisenberg_floor_ok", rep.heisenberg_floor_ok}};
  return out;
}

inline CommandOutput cmd_spectrum(const RunConfig& cfg) {
  const SpatialGrid grid = resolve_grid(cfg, "spectrum");
  const StateVector s = make_configured_state(cfg, grid);
  const CGrid cg = configured_cgrid(cfg);
  TransformOptions topts;
  topts.threads = cfg.threads;
  const SigmaCrossValidation cv =
      cross_validate_sigma(CorrelationEigensystem::compute(grid, cfg.threads), s, cg, cfg.spectrum.bins, topts);

  CommandOutput out;
  out.csv = "c,sigma_transform,sigma_matrix\n";
  for (std::size_t k = 0; k < cg.points; ++k)
    out.csv += csv_row({cg.value(k), cv.transform.sigma[k], cv.matrix.sigma[k]});
  json& j = out.report;
  j["config"] = config_echo(cfg, "spectrum");
  j["tv_distance"] = cv.tv_distance;
  j["bins"] = cv.bins;
  j["mean_transform"] = cv.transform.mean;
  j["mean_matrix"] = cv.matrix.mean;
  j["mean_matrix_discrete"] = cv.matrix.discrete_mean;
  j["mean_quadrature"] = correlation_expectation(s);
  j["total_transform"] = cv.transform.total;
  j["total_matrix"] = cv.matrix.total;
  j["total_matrix_discrete"] = cv.matrix.discrete_total;
  j["mass_below_innermost_sample"] = cv.transform.mass_below;
  j["binned_transform"] = cv.binned_transform;
  j["binned_matrix"] = cv.binned_matrix;
  return out;
}

inline CommandOutput cmd_transform(const RunConfig& cfg) {
  const SpatialGrid grid = resolve_grid(cfg, "transform");
  const StateVector s = make_configured_state(cfg, grid);
  const CGrid cg = configured_cgrid(cfg);
  TransformOptions topts;
  topts.threads = cfg.threads;
  const CorrelationSpectrum spec = correlation_transform(s, cg, topts);

  CommandOutput out;
  out.csv = "c,amp_g_re,amp_g_im,amp_u_re,amp_u_im,sigma_g,sigma_u,sigma\n";
  for (std::size_t k = 0; k < cg.points; ++k)
    out.csv += csv_row({cg.value(k), spec.amp_g[k].real(), spec.amp_g[k].imag(), spec.amp_u[k].real(),
                        spec.amp_u[k].imag(), spec.sigma_g[k], spec.sigma_u[k], spec.sigma[k]});
  json& j = out.report;
  j["config"] = config_echo(cfg, "transform");
  j["total"] = spec.total;
  j["mean"] = spec.mean;
  j["mass_below_innermost_sample"] = spec.mass_below;
  return out;
}

inline CommandOutput cmd_moments(const RunConfig& cfg) {
  const SpatialGrid grid = resolve_grid(cfg, "moments");
  const StateVector s = make_configured_state(cfg, grid);
  const MomentRecord r = moments(s);
  const UncertaintyCheck u = uncertainty_from(r, grid.hbar);
  CommandOutput out;
  json& j = out.report;
  j["config"] = config_echo(cfg, "moments");
  j["moments"] = moments_json(r);
  j["corr_matrix_route"] = correlation_expectation_matrix(s);
  j["uncertainty"] = {{"lhs", u.lhs}, {"rhs", u.rhs}, {"relative_slack", u.relative_slack()}, {"saturated", u.saturated}};
  j["boundary_mass"] = boundary_mass(s);
  return out;
}

inline SearchOptions configured_search(const RunConfig& cfg) {
  SearchOptions o;
  o.seeds = SearchOptions::seed_range(cfg.pauli.trials, cfg.pauli.first_seed);
  o.max_iter = cfg.pauli.max_iter;
  o.tol = cfg.pauli.tol;
  o.eps_marginal = cfg.pauli.eps_marginal;
  o.eps_fidelity = cfg.pauli.eps_fidelity;
  o.method = cfg.pauli.method == "error_reduction" ? RetrievalMethod::ErrorReduction : RetrievalMethod::Accelerated;
  o.threads = cfg.threads;
  o.cgrid = configured_cgrid(cfg);
  return o;
}

inline json partner_report_json(const PartnerSearchReport& rep) {
  json j;
  j["trials"] = rep.trials;
  j["converged"] = rep.converged;
  j["seeds"] = rep.options.seeds;
  j["tolerances"] = {{"tol", rep.options.tol},
                     {"eps_marginal", rep.options.eps_marginal},
                     {"eps_fidelity", rep.options.eps_fidelity},
                     {"dedupe_fidelity", rep.options.dedupe_fidelity},
                     {"max_iter", rep.options.max_iter},
                     {"method", to_string(rep.options.method)}};
  j["reference"] = {{"corr", correlation_expectation(rep.reference)}, {"amplitudes", state_json(rep.reference)}};
  json trials = json::array();
  for (const auto& t : rep.trial_log)
    trials.push_back({{"seed", t.seed},
                      {"converged", t.converged},
                      {"iterations", t.iterations},
                      {"residual", t.residual},
                      {"errors", errors_json(t.errors)},
                      {"fidelity_to_reference", t.fidelity_to_reference},
                      {"cluster", t.cluster}});
  j["trial_log"] = trials;
  json clusters = json::array(), partners = json::array();
  for (std::size_t c = 0; c < rep.found.size(); ++c) {
    const FoundState& fs = rep.found[c];
    clusters.push_back({{"cluster", c},
                        {"seed", fs.seed},
                        {"members", fs.members},
                        {"fidelity_to_reference", fs.fidelity_to_reference},
                        {"errors", errors_json(fs.errors)},
                        {"partner", fs.partner}});
    if (!fs.partner) continue;
    partners.push_back({{"cluster", c},
                        {"seed", fs.seed},
                        {"fidelity_to_reference", fs.fidelity_to_reference},
                        {"errors", errors_json(fs.errors)},
                        {"delta_mean_c", fs.discrimination.delta_mean_c},
                        {"tv_sigma", fs.discrimination.tv_sigma},
                        {"discriminated", fs.discriminated},
                        {"amplitudes", state_json(fs.state)}});
  }
  j["clusters"] = clusters;
  j["partners_found"] = partners;
  j["partner_count"] = rep.partner_count;
  j["all_partners_discriminated"] = rep.all_partners_discriminated;
  j["counterexamples"] = rep.counterexamples;
  return j;
}

inline CommandOutput cmd_pauli(const RunConfig& cfg) {
  const SpatialGrid grid = resolve_grid(cfg, "pauli");
  const StateVector ref = make_configured_state(cfg, grid);
  const PartnerSearchReport rep = find_partners(ref, configured_search(cfg));
  CommandOutput out;
  out.report["config"] = config_echo(cfg, "pauli");
  const json body = partner_report_json(rep);
  for (const auto& [key, value] : body.items()) out.report[key] = value;
  return out;
}

struct PauliReportCheck {
  std::size_t partners = 0;
  std::size_t verified = 0;
  bool ok() const { return partners == verified; }
};

/// Rebuilds the reference and every stored partner from a cmd_pauli report and
/// re-applies is_partner at the recorded tolerances.
inline PauliReportCheck verify_pauli_report(const json& report) {
  const json& g = report.at("config").at("grid");
  const SpatialGrid grid =
      make_grid(g.at("n").get<std::size_t>(), g.at("length").get<double>(), g.at("hbar").get<double>(),
                g.at("mass").get<double>());
  const StateVector ref = state_from_json(grid, report.at("reference").at("amplitudes"));
  const double eps_m = report.at("tolerances").at("eps_marginal").get<double>();
  const double eps_f = report.at("tolerances").at("eps_fidelity").get<double>();
  PauliReportCheck check;
  for (const auto& p : report.at("partners_found")) {
    ++check.partners;
    if (is_partner(ref, state_from_json(grid, p.at("amplitudes")), eps_m, eps_f)) ++check.verified;
  }
  return check;
}

inline json error_json(const Error& e) {
  return {{"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}};
}

}  // namespace corrlab
