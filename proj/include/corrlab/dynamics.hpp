#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "corrlab/detail/parallel.hpp"
#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/states.hpp"

namespace corrlab {

inline constexpr double kMaxBoundaryMass = 1e-10;

struct EvolveOptions {
  // Multiplies p^2 in the propagator. 1 is physical; anything else is a
  // deliberately broken convention used as a negative control.
  double dispersion_scale = 1.0;
  double max_boundary_mass = kMaxBoundaryMass;
};

/// Free evolution exp(-i t H / hbar) applied exactly in momentum space, no boundary check.
inline StateVector evolve_unchecked(const StateVector& s, double t, double dispersion_scale = 1.0) {
  if (t == 0.0) return s;
  StateVector m = in_momentum(s);
  const double scale = dispersion_scale * t / (2.0 * s.grid.mass * s.grid.hbar);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double p = s.grid.p(k);
    m.amp[k] *= std::polar(1.0, -p * p * scale);
  }
  return s.rep == Representation::Momentum ? m : to_position(m);
}

/// Exact free evolution. Rejects (does not truncate) times at which more than
/// max_boundary_mass sits in the outer quarter of either representation; the
/// error message reports the largest admissible time towards t.
inline StateVector evolve(const StateVector& s, double t, const EvolveOptions& opts = {}) {
  detail::require(std::isfinite(t), ErrorKind::InvalidArgument, "evolution time must be finite");
  if (t == 0.0) return s;
  StateVector out = evolve_unchecked(s, t, opts.dispersion_scale);
  if (boundary_mass(out) <= opts.max_boundary_mass) return out;

  double ok = 0.0, bad = t;
  if (boundary_mass(s) > opts.max_boundary_mass) bad = 0.0;
  for (int it = 0; it < 60 && bad != 0.0; ++it) {
    const double mid = 0.5 * (ok + bad);
    if (boundary_mass(evolve_unchecked(s, mid, opts.dispersion_scale)) <= opts.max_boundary_mass)
      ok = mid;
    else
      bad = mid;
  }
  char msg[160];
  std::snprintf(msg, sizeof msg, "evolve: boundary mass exceeds %g at t = %.17g; max admissible t = %.17g",
                opts.max_boundary_mass, t, ok);
  throw Error(ErrorKind::SupportViolation, msg);
}

struct PolyFit {
  std::vector<double> coeffs;  // ascending powers
  double max_residual = 0.0;

  double operator()(double t) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * t + coeffs[k];
    return acc;
  }
};

inline PolyFit least_squares_poly(const std::vector<double>& t, const std::vector<double>& y, int degree) {
  detail::require(t.size() == y.size() && t.size() > static_cast<std::size_t>(degree), ErrorKind::InvalidArgument,
                  "not enough samples for the polynomial fit");
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(m, degree + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double pw = 1.0;
    for (int k = 0; k <= degree; ++k) {
      a(i, k) = pw;
      pw *= t[static_cast<std::size_t>(i)];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  PolyFit fit;
  fit.coeffs.assign(x.data(), x.data() + x.size());
  for (std::size_t i = 0; i < t.size(); ++i) fit.max_residual = std::max(fit.max_residual, std::abs(fit(t[i]) - y[i]));
  return fit;
}

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<MomentRecord> records;
  PolyFit x2_fit;    // <X^2>(t), quadratic
  PolyFit corr_fit;  // <C>(t), linear
  double energy_drift = 0.0;
  double var_p_drift = 0.0;
};

struct TrackOptions {
  std::size_t threads = 1;
  EvolveOptions evolve;
};

inline std::vector<double> linspace(double a, double b, std::size_t count) {
  detail::require(count >= 2, ErrorKind::InvalidArgument, "need at least two time points");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

/// Moments along the free trajectory. Each time point is evolved from s0
/// directly, so records do not depend on ordering or thread count.
inline TrajectoryRecord track(const StateVector& s0, const std::vector<double>& times, const TrackOptions& opts = {}) {
  detail::require(times.size() >= 3, ErrorKind::InvalidArgument, "track needs at least three time points");
  detail::require(std::is_sorted(times.begin(), times.end()), ErrorKind::InvalidArgument, "times must be ordered");
  detail::require(boundary_mass(s0) <= opts.evolve.max_boundary_mass, ErrorKind::SupportViolation,
                  "track: initial state already reaches the grid boundary");
  TrajectoryRecord rec;
  rec.times = times;
  rec.records.resize(times.size());
  detail::parallel_for(times.size(), opts.threads, [&](std::size_t i) {
    rec.records[i] = moments(evolve(s0, times[i], opts.evolve), times[i]);
  });
  std::vector<double> x2, corr;
  for (const auto& r : rec.records) {
    x2.push_back(r.mean_x2);
    corr.push_back(r.corr);
  }
  rec.x2_fit = least_squares_poly(times, x2, 2);
  rec.corr_fit = least_squares_poly(times, corr, 1);
  for (const auto& r : rec.records) {
    rec.energy_drift = std::max(rec.energy_drift, std::abs(r.energy - rec.records.front().energy));
    rec.var_p_drift = std::max(rec.var_p_drift, std::abs(r.var_p - rec.records.front().var_p));
  }
  return rec;
}

/// max_t |<C>(t) - <C>(0) - 2<H>(0) t|.
inline double correlation_law_residual(const TrajectoryRecord& rec) {
  const MomentRecord& r0 = rec.records.front();
  double worst = 0.0;
  for (const auto& r : rec.records)
    worst = std::max(worst, std::abs(r.corr - r0.corr - 2.0 * r0.energy * (r.t - r0.t)));
  return worst;
}

/// max_t |<X^2>(t) - closed form| / <X^2>(t), closed form
/// <X^2>(0) + (2/m)<C>(0) t + (2/m)<H> t^2 from integrating both laws.
inline double width_law_residual(const TrajectoryRecord& rec, double mass) {
  const MomentRecord& r0 = rec.records.front();
  double worst = 0.0;
  for (const auto& r : rec.records) {
    const double dt = r.t - r0.t;
    const double predicted = r0.mean_x2 + 2.0 / mass * r0.corr * dt + 2.0 / mass * r0.energy * dt * dt;
    worst = std::max(worst, std::abs(r.mean_x2 - predicted) / std::abs(r.mean_x2));
  }
  return worst;
}

struct ShrinkSpreadReport {
  std::size_t sign_changes = 0;
  std::vector<double> crossing_times;  // linear interpolation of <C>(t) = 0
  double predicted_crossing = std::numeric_limits<double>::quiet_NaN();
  double min_width_time = 0.0;  // vertex of the quadratic var_x fit, clipped to the window
  double sample_argmin_time = 0.0;
  bool shrinking_initially = false;
  double min_uncertainty_product = 0.0;  // min var_x var_p
  bool heisenberg_floor_ok = true;
};

inline ShrinkSpreadReport shrink_spread_report(const TrajectoryRecord& rec, double hbar) {
  ShrinkSpreadReport rep;
  const auto& rs = rec.records;
  const MomentRecord& r0 = rs.front();
  if (r0.energy > 0.0) rep.predicted_crossing = r0.t - r0.corr / (2.0 * r0.energy);
  constexpr double kZero = 1e-12;
  rep.shrinking_initially = r0.corr < -kZero;

  int last_sign = 0;
  double last_t = r0.t, last_c = r0.corr;
  for (const auto& r : rs) {
    const int sign = r.corr > kZero ? 1 : (r.corr < -kZero ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) {
        ++rep.sign_changes;
        rep.crossing_times.push_back(last_t + (r.t - last_t) * (0.0 - last_c) / (r.corr - last_c));
      }
      last_sign = sign;
      last_t = r.t;
      last_c = r.corr;
    }
  }

  std::vector<double> var_x;
  std::size_t argmin = 0;
  rep.min_uncertainty_product = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    var_x.push_back(rs[i].var_x);
    if (rs[i].var_x < rs[argmin].var_x) argmin = i;
    rep.min_uncertainty_product = std::min(rep.min_uncertainty_product, rs[i].var_x * rs[i].var_p);
  }
  rep.sample_argmin_time = rs[argmin].t;
  const PolyFit vfit = least_squares_poly(rec.times, var_x, 2);
  double vertex = rec.times.front();
  if (vfit.coeffs[2] > 0.0) vertex = -vfit.coeffs[1] / (2.0 * vfit.coeffs[2]);
  rep.min_width_time = std::clamp(vertex, rec.times.front(), rec.times.back());
  rep.heisenberg_floor_ok = rep.min_uncertainty_product >= hbar * hbar / 4.0 * (1.0 - kUncertaintySlack);
  return rep;
}

inline ShrinkSpreadReport shrink_spread_report(const StateVector& s0, const std::vector<double>& times,
                                               const TrackOptions& opts = {}) {
  return shrink_spread_report(track(s0, times, opts), s0.grid.hbar);
}

}  // namespace corrlab
