#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/operators.hpp"

namespace corrlab {

// ---------------------------------------------------------------------------
// State factory
// ---------------------------------------------------------------------------

/// psi(x) ~ exp(-(alpha + i beta)(x - x0)^2 / 2 + i p0 x / hbar), normalized on the grid.
/// The chirp beta sets <C> = -hbar beta / (2 alpha) for x0 = p0 = 0.
inline StateVector gaussian(const SpatialGrid& grid, double x0, double p0, double alpha, double beta) {
  detail::require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "gaussian alpha must be positive");
  detail::require(std::isfinite(beta) && std::isfinite(x0) && std::isfinite(p0), ErrorKind::InvalidArgument,
                  "gaussian parameters must be finite");
  cvec amp(grid.n);
  const cplx a{alpha, beta};
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    const double d = x - x0;
    amp[j] = std::exp(-a * d * d / 2.0 + cplx{0.0, p0 * x / grid.hbar});
  }
  StateVector s = normalized(StateVector{grid, std::move(amp), Representation::Position});
  require_interior(s, "gaussian");
  return s;
}

/// Hermite function of the given order centred at x0 with width parameter alpha.
inline StateVector hermite_gaussian(const SpatialGrid& grid, int order, double alpha = 1.0, double x0 = 0.0) {
  detail::require(order >= 0, ErrorKind::InvalidArgument, "hermite order must be nonnegative");
  detail::require(alpha > 0.0, ErrorKind::InvalidArgument, "hermite alpha must be positive");
  cvec amp(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double y = std::sqrt(alpha) * (grid.x(j) - x0);
    double h_prev = 1.0;
    double h = 2.0 * y;
    if (order == 0) h = 1.0;
    for (int k = 1; k < order; ++k) {
      const double next = 2.0 * y * h - 2.0 * k * h_prev;
      h_prev = h;
      h = next;
    }
    amp[j] = h * std::exp(-y * y / 2.0);
  }
  StateVector s = normalized(StateVector{grid, std::move(amp), Representation::Position});
  require_interior(s, "hermite_gaussian");
  return s;
}

/// Random smooth state: complex normal momentum coefficients under a Gaussian
/// envelope of width `smoothness`, then a position envelope of width L/24.
inline StateVector random_state(const SpatialGrid& grid, std::uint64_t seed, double smoothness) {
  detail::require(smoothness > 0.0 && std::isfinite(smoothness), ErrorKind::InvalidArgument,
                  "random_state smoothness must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  cvec coeffs(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double p = grid.p(k);
    const double re = normal(rng);
    const double im = normal(rng);
    coeffs[k] = cplx{re, im} * std::exp(-p * p / (2.0 * smoothness * smoothness));
  }
  StateVector s = to_position(StateVector{grid, std::move(coeffs), Representation::Momentum});
  const double width = grid.length / 24.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    s.amp[j] *= std::exp(-x * x / (2.0 * width * width));
  }
  s = normalized(std::move(s));
  require_interior(s, "random_state");
  return s;
}

/// Exact grid translation psi(x - a), via the momentum phase exp(-i p a / hbar).
inline StateVector translate(const StateVector& s, double shift) {
  StateVector m = in_momentum(s);
  for (std::size_t k = 0; k < m.size(); ++k) m.amp[k] *= std::polar(1.0, -m.grid.p(k) * shift / m.grid.hbar);
  return s.rep == Representation::Momentum ? m : to_position(m);
}

// ---------------------------------------------------------------------------
// Densities and moments
// ---------------------------------------------------------------------------

inline std::vector<double> position_density(const StateVector& s) {
  const StateVector pos = in_position(s);
  std::vector<double> rho(pos.size());
  for (std::size_t j = 0; j < pos.size(); ++j) rho[j] = std::norm(pos.amp[j]);
  return rho;
}

inline std::vector<double> momentum_density(const StateVector& s) {
  const StateVector mom = in_momentum(s);
  std::vector<double> varpi(mom.size());
  for (std::size_t k = 0; k < mom.size(); ++k) varpi[k] = std::norm(mom.amp[k]);
  return varpi;
}

/// P psi in position representation via the spectral derivative.
inline StateVector apply_momentum(const StateVector& s) {
  StateVector m = in_momentum(s);
  for (std::size_t k = 0; k < m.size(); ++k) m.amp[k] *= m.grid.p(k);
  return to_position(m);
}

/// <C> by quadrature: Re sum conj(psi) x (P psi) dx. The real part of <XP> equals
/// <(XP + PX)/2> because the two products are adjoints of each other.
inline double correlation_expectation(const StateVector& s) {
  const StateVector pos = in_position(s);
  const StateVector ppsi = apply_momentum(pos);
  double acc = 0.0;
  for (std::size_t j = 0; j < pos.size(); ++j)
    acc += (std::conj(pos.amp[j]) * pos.grid.x(j) * ppsi.amp[j]).real();
  return acc * pos.grid.dx();
}

/// <C> through the dense matrix of build_correlation (cross-check route).
inline double correlation_expectation_matrix(const StateVector& s) {
  return expectation(build_correlation(s.grid), s).real();
}

struct MomentRecord {
  double t = 0.0;
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double mean_x2 = 0.0;
  double corr = 0.0;
  double energy = 0.0;
  double covariance = 0.0;
};

inline constexpr double kUncertaintySlack = 1e-9;

namespace detail {

inline MomentRecord raw_moments(const StateVector& s, double t) {
  const StateVector pos = in_position(s);
  const StateVector mom = in_momentum(s);
  const SpatialGrid& g = s.grid;
  MomentRecord r;
  r.t = t;
  double sx = 0.0, sx2 = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double w = std::norm(pos.amp[j]);
    sx += w * g.x(j);
    sx2 += w * g.x(j) * g.x(j);
  }
  r.mean_x = sx * g.dx();
  r.mean_x2 = sx2 * g.dx();
  double vx = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double d = g.x(j) - r.mean_x;
    vx += std::norm(pos.amp[j]) * d * d;
  }
  r.var_x = vx * g.dx();

  double sp = 0.0, sp2 = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    const double w = std::norm(mom.amp[k]);
    sp += w * g.p(k);
    sp2 += w * g.p(k) * g.p(k);
  }
  r.mean_p = sp * g.dp();
  double vp = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    const double d = g.p(k) - r.mean_p;
    vp += std::norm(mom.amp[k]) * d * d;
  }
  r.var_p = vp * g.dp();
  r.energy = sp2 * g.dp() / (2.0 * g.mass);
  r.corr = correlation_expectation(pos);
  r.covariance = r.corr - r.mean_x * r.mean_p;
  return r;
}

}  // namespace detail

struct UncertaintyCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool saturated = false;
  double relative_slack() const { return (lhs - rhs) / rhs; }
};

/// var_x var_p >= hbar^2/4 + cov^2 with cov = <C> - <X><P>.
inline UncertaintyCheck uncertainty_from(const MomentRecord& r, double hbar) {
  UncertaintyCheck u;
  u.lhs = r.var_x * r.var_p;
  u.rhs = hbar * hbar / 4.0 + r.covariance * r.covariance;
  u.saturated = std::abs(u.lhs - u.rhs) <= 1e-6 * u.lhs;
  return u;
}

/// Moments of a normalized state. Throws DiscretizationFailure when the
/// Schroedinger bound is violated beyond kUncertaintySlack, which only happens
/// when the state leaks to the grid boundary.
inline MomentRecord moments(const StateVector& s, double t = 0.0) {
  MomentRecord r = detail::raw_moments(s, t);
  detail::require(r.var_x > 0.0 && r.var_p > 0.0, ErrorKind::DiscretizationFailure, "degenerate variances");
  const UncertaintyCheck u = uncertainty_from(r, s.grid.hbar);
  detail::require(u.lhs >= u.rhs * (1.0 - kUncertaintySlack), ErrorKind::DiscretizationFailure,
                  "Schroedinger uncertainty bound violated; state too close to the grid boundary");
  return r;
}

inline UncertaintyCheck schrodinger_uncertainty(const StateVector& s) {
  require_interior(s, "schrodinger_uncertainty");
  return uncertainty_from(moments(s), s.grid.hbar);
}

struct ParitySplit {
  StateVector even;
  StateVector odd;
  double even_weight = 0.0;
  double odd_weight = 0.0;
};

/// even_j = (psi_j + psi_{n-1-j})/2, odd likewise with a minus sign. Components
/// are left unnormalized so even + odd reproduces the input.
inline ParitySplit parity_split(const StateVector& s) {
  const StateVector pos = in_position(s);
  const std::size_t n = pos.size();
  cvec even(n), odd(n);
  for (std::size_t j = 0; j < n; ++j) {
    even[j] = 0.5 * (pos.amp[j] + pos.amp[n - 1 - j]);
    odd[j] = 0.5 * (pos.amp[j] - pos.amp[n - 1 - j]);
  }
  ParitySplit out{StateVector{pos.grid, std::move(even), Representation::Position},
                  StateVector{pos.grid, std::move(odd), Representation::Position}, 0.0, 0.0};
  out.even_weight = out.even.norm_squared();
  out.odd_weight = out.odd.norm_squared();
  return out;
}

}  // namespace corrlab
