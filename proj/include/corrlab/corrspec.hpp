#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "corrlab/detail/fft.hpp"
#include "corrlab/detail/parallel.hpp"
#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/operators.hpp"

namespace corrlab {

enum class Parity { Gerade, Ungerade };

/// Continuum eigenfunctions of C in position representation:
///   eta^g_c(x) = |x|^{-1/2 + i c/hbar} / (2 sqrt(hbar pi)),  eta^u_c(x) = sign(x) eta^g_c(x).
inline cplx eta_eval(double c, Parity parity, double x, double hbar) {
  detail::require(x != 0.0 && std::isfinite(x), ErrorKind::InvalidArgument, "eta is singular at x = 0");
  detail::require(hbar > 0.0, ErrorKind::InvalidArgument, "hbar must be positive");
  const double ax = std::abs(x);
  const double modulus = 1.0 / (2.0 * std::sqrt(hbar * std::numbers::pi) * std::sqrt(ax));
  const double sign = (parity == Parity::Ungerade && x < 0.0) ? -1.0 : 1.0;
  return std::polar(sign * modulus, c / hbar * std::log(ax));
}

/// Uniform half-offset grid of correlation values c_k = c_min + (k + 1/2) dc.
struct CGrid {
  double c_min = -20.0;
  double c_max = 20.0;
  std::size_t points = 1024;

  double spacing() const { return (c_max - c_min) / static_cast<double>(points); }
  double value(std::size_t k) const { return c_min + (static_cast<double>(k) + 0.5) * spacing(); }
  std::vector<double> values() const {
    std::vector<double> out(points);
    for (std::size_t k = 0; k < points; ++k) out[k] = value(k);
    return out;
  }
  bool operator==(const CGrid&) const = default;
};

inline CGrid make_cgrid(double half_range, std::size_t points) {
  detail::require(half_range > 0.0 && std::isfinite(half_range), ErrorKind::InvalidArgument,
                  "c-grid half range must be positive");
  detail::require(points >= 2, ErrorKind::InvalidArgument, "c-grid needs at least two points");
  return CGrid{-half_range, half_range, points};
}

enum class SpectrumSource { Transform, Matrix };

inline const char* to_string(SpectrumSource s) { return s == SpectrumSource::Transform ? "transform" : "matrix"; }

/// Piecewise-linear density through knots (c_i, d_i), zero outside the knot range.
struct SectorDensity {
  std::vector<double> knots;
  std::vector<double> density;

  double at(double c) const {
    if (knots.size() < 2 || c < knots.front() || c > knots.back()) return 0.0;
    const auto it = std::upper_bound(knots.begin(), knots.end(), c);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - knots.begin()), knots.size() - 1);
    const double c0 = knots[i - 1], c1 = knots[i];
    const double w = (c - c0) / (c1 - c0);
    return (1.0 - w) * density[i - 1] + w * density[i];
  }

  double integrate(double a, double b) const {
    double acc = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const double lo = std::max(a, knots[i - 1]);
      const double hi = std::min(b, knots[i]);
      if (hi <= lo) continue;
      acc += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    }
    return acc;
  }
};

struct CorrelationSpectrum {
  CGrid cgrid;
  SpectrumSource source = SpectrumSource::Transform;
  cvec amp_g;  // transform route only
  cvec amp_u;
  std::vector<double> sigma_g;
  std::vector<double> sigma_u;
  std::vector<double> sigma;
  double total = 0.0;  // sum sigma dc over the c-grid
  double mean = 0.0;   // sum c sigma dc over the c-grid
  // Transform route: estimated weight inside |y| < step/2, covered by the Taylor tail.
  double mass_below = 0.0;
  // Matrix route: exact spectral sums over all eigenvectors.
  double discrete_total = 0.0;
  double discrete_mean = 0.0;
  std::vector<SectorDensity> sectors;
};

struct TransformOptions {
  std::size_t threads = 1;
  // log-grid step target is du_scale / n
  double du_scale = 1.0;
  double max_mass_below = 0.25;
};

namespace detail {

inline std::size_t next_pow2(double v) {
  std::size_t m = 1;
  while (static_cast<double>(m) < v) m <<= 1;
  return m;
}

// Band-limited interpolation of a grid function from its conjugate-space
// amplitudes: f(y) = dq/sqrt(2 pi hbar) sum_k F_k exp(i sign q_k y / hbar).
class BandLimitedInterpolant {
 public:
  explicit BandLimitedInterpolant(const StateVector& s) : grid_(s.grid) {
    if (s.rep == Representation::Position) {
      dual_ = to_momentum(s).amp;
      sign_ = 1.0;
      dq_ = grid_.dp();
    } else {
      dual_ = to_position(s).amp;
      sign_ = -1.0;
      dq_ = grid_.dx();
    }
    q0_ = -grid_.offset() * dq_;
    pref_ = dq_ / std::sqrt(2.0 * std::numbers::pi * grid_.hbar);
  }

  /// Scaled Taylor coefficients about 0: f(t y_ref) = sum_m T_m t^m.
  cvec taylor(double y_ref, std::size_t terms) const {
    cvec power(dual_.size());
    std::vector<cplx> step(dual_.size());
    for (std::size_t k = 0; k < dual_.size(); ++k) {
      power[k] = dual_[k];
      step[k] = cplx{0.0, sign_ * (q0_ + static_cast<double>(k) * dq_) * y_ref / grid_.hbar};
    }
    cvec out(terms);
    for (std::size_t m = 0; m < terms; ++m) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = 0; k < power.size(); ++k) {
        acc += power[k];
        power[k] *= step[k] / static_cast<double>(m + 1);
      }
      out[m] = pref_ * acc;
    }
    return out;
  }

  cplx operator()(double y) const {
    const cplx z = std::polar(1.0, sign_ * dq_ * y / grid_.hbar);
    cplx acc = dual_.back();
    for (std::size_t k = dual_.size() - 1; k-- > 0;) acc = acc * z + dual_[k];
    return pref_ * std::polar(1.0, sign_ * q0_ * y / grid_.hbar) * acc;
  }

 private:
  SpatialGrid grid_;
  cvec dual_;
  double sign_ = 1.0;
  double dq_ = 0.0;
  double q0_ = 0.0;
  double pref_ = 0.0;
};

inline void finish_spectrum(CorrelationSpectrum& spec) {
  const std::size_t m = spec.cgrid.points;
  spec.sigma.assign(m, 0.0);
  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    spec.sigma[k] = spec.sigma_g[k] + spec.sigma_u[k];
    total += spec.sigma[k];
    mean += spec.cgrid.value(k) * spec.sigma[k];
  }
  spec.total = total * spec.cgrid.spacing();
  spec.mean = mean * spec.cgrid.spacing();
}

}  // namespace detail

/// Parity-resolved Mellin-type transform giving <eta^g_c, psi> and <eta^u_c, psi>.
///
/// With y = e^u on the half-line,
///   <eta_c, psi> = (hbar pi)^{-1/2} int e^{u/2} e^{-i c u / hbar} psi_{even/odd}(e^u) du.
/// The parity parts are resampled onto a uniform u-grid from ln(step/2) to
/// ln(n step/2) by band-limited interpolation and the u-integral is a zero-padded
/// FFT whose bin spacing is the c-grid spacing. Below the innermost sample
/// y_min the band-limited function is replaced by its Taylor series about 0
/// (terms bounded by (pi/2)^m/m!), which integrates against y^{-1/2-ic/hbar}
/// term by term.
///
/// Works in either representation; in momentum representation the result is
/// the same formula with y = p.
inline CorrelationSpectrum correlation_transform(const StateVector& s, const CGrid& cgrid,
                                                 const TransformOptions& opts = {}) {
  using detail::require;
  require(cgrid.points >= 2 && cgrid.c_max > cgrid.c_min, ErrorKind::InvalidArgument, "invalid c-grid");
  require(std::abs(cgrid.c_min + cgrid.c_max) <= 1e-12 * cgrid.c_max, ErrorKind::InvalidArgument,
          "c-grid must be symmetric about 0");
  const SpatialGrid& g = s.grid;
  const double hbar = g.hbar;
  const double h = s.step();
  const double dc = cgrid.spacing();
  const double u_min = std::log(h / 2.0);
  const double u_max = std::log(static_cast<double>(g.n) * h / 2.0);

  const double du_target = opts.du_scale / static_cast<double>(g.n);
  const double window = 2.0 * std::numbers::pi * hbar / dc;
  const std::size_t fft_size = detail::next_pow2(window / du_target);
  require(fft_size <= (std::size_t{1} << 24), ErrorKind::InvalidArgument, "c-grid spacing too fine for the log FFT");
  const double du = window / static_cast<double>(fft_size);
  const std::size_t nu = static_cast<std::size_t>(std::floor((u_max - u_min) / du)) + 1;
  require(nu <= fft_size, ErrorKind::InvalidArgument,
          "c-grid spacing too coarse: the log window (" + std::to_string(u_max - u_min) +
              ") does not fit the FFT period " + std::to_string(window));

  const detail::BandLimitedInterpolant interp(s);
  cvec even(nu), odd(nu);
  detail::parallel_for(nu, opts.threads, [&](std::size_t j) {
    const double y = std::exp(u_min + static_cast<double>(j) * du);
    const cplx fp = interp(y);
    const cplx fm = interp(-y);
    even[j] = 0.5 * (fp + fm);
    odd[j] = 0.5 * (fp - fm);
  });

  CorrelationSpectrum spec;
  spec.cgrid = cgrid;
  spec.source = SpectrumSource::Transform;
  const double y_min = h / 2.0;
  spec.mass_below = 2.0 * y_min * (std::norm(even[0]) + std::norm(odd[0]) / 3.0);
  require(spec.mass_below <= opts.max_mass_below, ErrorKind::DiscretizationFailure,
          "correlation_transform: weight below the smallest resolvable |y| is " + std::to_string(spec.mass_below));

  const double c0 = cgrid.value(0);
  const double norm = 1.0 / std::sqrt(hbar * std::numbers::pi);
  // Taylor terms beyond 40 are below (pi/2)^40/40! ~ 1e-40.
  const cvec taylor = interp.taylor(y_min, 40);
  auto channel = [&](const cvec& part, std::size_t parity) {
    cvec buf(fft_size, cplx{0.0, 0.0});
    for (std::size_t j = 0; j < nu; ++j) {
      const double u = u_min + static_cast<double>(j) * du;
      const double w = (j == 0 || j == nu - 1) ? 0.5 * du : du;
      buf[j] = part[j] * (w * std::exp(0.5 * u)) * std::polar(1.0, -c0 * static_cast<double>(j) * du / hbar);
    }
    detail::fft_forward(buf);
    cvec amp(cgrid.points);
    for (std::size_t k = 0; k < cgrid.points; ++k) {
      const double c = cgrid.value(k);
      cplx series{0.0, 0.0};
      for (std::size_t m = parity; m < taylor.size(); m += 2)
        series += taylor[m] / cplx{static_cast<double>(m) + 0.5, -c / hbar};
      const cplx tail = std::sqrt(y_min) * series;
      amp[k] = norm * std::polar(1.0, -c * u_min / hbar) * (buf[k] + tail);
    }
    return amp;
  };
  spec.amp_g = channel(even, 0);
  spec.amp_u = channel(odd, 1);
  spec.sigma_g.resize(cgrid.points);
  spec.sigma_u.resize(cgrid.points);
  for (std::size_t k = 0; k < cgrid.points; ++k) {
    spec.sigma_g[k] = std::norm(spec.amp_g[k]);
    spec.sigma_u[k] = std::norm(spec.amp_u[k]);
  }
  detail::finish_spectrum(spec);
  return spec;
}

/// Direct quadrature sum_j conj(eta_c(x_j)) psi(x_j) dx on the state's own grid.
/// O(n n_c) and inaccurate near the origin for large |c|; kept as a slow reference.
inline cplx correlation_amplitude_direct(const StateVector& s, double c, Parity parity) {
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < s.size(); ++j)
    acc += std::conj(eta_eval(c, parity, s.coordinate(j), s.grid.hbar)) * s.amp[j];
  return acc * s.step();
}

// ---------------------------------------------------------------------------
// Matrix route
// ---------------------------------------------------------------------------

/// Eigendecomposition of the dense C matrix, block-diagonalized by parity.
/// The discrete C commutes exactly with the reflection j -> n-1-j, so the
/// even block is C_ab + C_{a,n-1-b} and the odd block C_ab - C_{a,n-1-b}.
struct CorrelationEigensystem {
  SpatialGrid grid;
  Eigen::VectorXd values_g;
  Eigen::VectorXd values_u;
  DenseMatrix vectors_g;
  DenseMatrix vectors_u;

  static CorrelationEigensystem compute(const SpatialGrid& grid, std::size_t threads = 1) {
    const OperatorMatrix c = build_correlation(grid);
    const auto n = static_cast<Eigen::Index>(grid.n);
    const auto half = n / 2;
    DenseMatrix blocks[2] = {DenseMatrix(half, half), DenseMatrix(half, half)};
    for (Eigen::Index b = 0; b < half; ++b)
      for (Eigen::Index a = 0; a < half; ++a) {
        blocks[0](a, b) = c.mat(a, b) + c.mat(a, n - 1 - b);
        blocks[1](a, b) = c.mat(a, b) - c.mat(a, n - 1 - b);
      }
    CorrelationEigensystem out;
    out.grid = grid;
    Eigen::VectorXd values[2];
    DenseMatrix vectors[2];
    detail::parallel_for(2, threads, [&](std::size_t i) {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(blocks[i]);
      detail::require(solver.info() == Eigen::Success, ErrorKind::DiscretizationFailure,
                      "correlation eigensolver did not converge");
      values[i] = solver.eigenvalues();
      vectors[i] = solver.eigenvectors();
    });
    out.values_g = std::move(values[0]);
    out.values_u = std::move(values[1]);
    out.vectors_g = std::move(vectors[0]);
    out.vectors_u = std::move(vectors[1]);
    return out;
  }

  std::vector<double> all_values() const {
    std::vector<double> v(values_g.data(), values_g.data() + values_g.size());
    v.insert(v.end(), values_u.data(), values_u.data() + values_u.size());
    std::sort(v.begin(), v.end());
    return v;
  }
};

namespace detail {

// Density estimate weight_i / local spacing at each interior eigenvalue.
inline SectorDensity sector_density(const Eigen::VectorXd& values, const std::vector<double>& weights) {
  SectorDensity out;
  const auto m = static_cast<std::size_t>(values.size());
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double spacing = 0.5 * (values(static_cast<Eigen::Index>(i + 1)) - values(static_cast<Eigen::Index>(i - 1)));
    if (spacing <= 0.0) continue;
    out.knots.push_back(values(static_cast<Eigen::Index>(i)));
    out.density.push_back(weights[i] / spacing);
  }
  return out;
}

}  // namespace detail

/// sigma(c) from projections of psi onto the eigenvectors of the dense C matrix.
inline CorrelationSpectrum sigma_from_matrix(const CorrelationEigensystem& eig, const StateVector& s,
                                             const CGrid& cgrid) {
  detail::require_same_grid(eig.grid, s.grid);
  const StateVector pos = in_position(s);
  const auto n = static_cast<Eigen::Index>(pos.grid.n);
  const auto half = n / 2;
  const double scale = std::sqrt(pos.grid.dx() / 2.0);
  Eigen::VectorXcd even(half), odd(half);
  for (Eigen::Index a = 0; a < half; ++a) {
    const cplx l = pos.amp[static_cast<std::size_t>(a)];
    const cplx r = pos.amp[static_cast<std::size_t>(n - 1 - a)];
    even(a) = (l + r) * scale;
    odd(a) = (l - r) * scale;
  }
  const Eigen::VectorXcd proj_g = eig.vectors_g.adjoint() * even;
  const Eigen::VectorXcd proj_u = eig.vectors_u.adjoint() * odd;

  CorrelationSpectrum spec;
  spec.cgrid = cgrid;
  spec.source = SpectrumSource::Matrix;
  std::vector<double> wg(static_cast<std::size_t>(half)), wu(static_cast<std::size_t>(half));
  for (Eigen::Index i = 0; i < half; ++i) {
    wg[static_cast<std::size_t>(i)] = std::norm(proj_g(i));
    wu[static_cast<std::size_t>(i)] = std::norm(proj_u(i));
    spec.discrete_total += wg[static_cast<std::size_t>(i)] + wu[static_cast<std::size_t>(i)];
    spec.discrete_mean += eig.values_g(i) * wg[static_cast<std::size_t>(i)] + eig.values_u(i) * wu[static_cast<std::size_t>(i)];
  }
  spec.sectors = {detail::sector_density(eig.values_g, wg), detail::sector_density(eig.values_u, wu)};
  spec.sigma_g.resize(cgrid.points);
  spec.sigma_u.resize(cgrid.points);
  for (std::size_t k = 0; k < cgrid.points; ++k) {
    spec.sigma_g[k] = spec.sectors[0].at(cgrid.value(k));
    spec.sigma_u[k] = spec.sectors[1].at(cgrid.value(k));
  }
  detail::finish_spectrum(spec);
  return spec;
}

inline CorrelationSpectrum sigma_from_matrix(const StateVector& s, const CGrid& cgrid) {
  return sigma_from_matrix(CorrelationEigensystem::compute(s.grid), s, cgrid);
}

/// Probability mass of sigma in `bins` equal bins spanning the c-grid. The
/// transform route aggregates whole c-grid cells (points must be divisible by
/// bins); the matrix route integrates its piecewise-linear density exactly.
inline std::vector<double> bin_masses(const CorrelationSpectrum& spec, std::size_t bins) {
  const CGrid& cg = spec.cgrid;
  detail::require(bins >= 1 && cg.points % bins == 0, ErrorKind::InvalidArgument,
                  "bin count must divide the c-grid point count");
  std::vector<double> out(bins, 0.0);
  const double width = (cg.c_max - cg.c_min) / static_cast<double>(bins);
  if (spec.source == SpectrumSource::Matrix && !spec.sectors.empty()) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double lo = cg.c_min + static_cast<double>(b) * width;
      const double hi = lo + width;
      for (const auto& sector : spec.sectors) out[b] += sector.integrate(lo, hi);
    }
    return out;
  }
  const std::size_t per_bin = cg.points / bins;
  for (std::size_t k = 0; k < cg.points; ++k) out[k / per_bin] += spec.sigma[k] * cg.spacing();
  return out;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require(a.size() == b.size(), ErrorKind::InvalidArgument, "total variation of unequal binnings");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

inline constexpr std::size_t kDefaultBins = 32;

struct SigmaCrossValidation {
  double tv_distance = 0.0;
  std::size_t bins = kDefaultBins;
  std::vector<double> binned_transform;
  std::vector<double> binned_matrix;
  CorrelationSpectrum transform;
  CorrelationSpectrum matrix;
};

inline SigmaCrossValidation cross_validate_sigma(const CorrelationEigensystem& eig, const StateVector& s,
                                                 const CGrid& cgrid, std::size_t bins = kDefaultBins,
                                                 const TransformOptions& opts = {}) {
  SigmaCrossValidation out;
  out.bins = bins;
  out.transform = correlation_transform(in_position(s), cgrid, opts);
  out.matrix = sigma_from_matrix(eig, s, cgrid);
  out.binned_transform = bin_masses(out.transform, bins);
  out.binned_matrix = bin_masses(out.matrix, bins);
  out.tv_distance = total_variation(out.binned_transform, out.binned_matrix);
  return out;
}

inline SigmaCrossValidation cross_validate_sigma(const StateVector& s, const CGrid& cgrid,
                                                 std::size_t bins = kDefaultBins, const TransformOptions& opts = {}) {
  return cross_validate_sigma(CorrelationEigensystem::compute(s.grid, opts.threads), s, cgrid, bins, opts);
}

/// max_k |a(c_k) - b(-c_k)| for two spectra on the same symmetric c-grid.
inline double max_mirror_difference(const CorrelationSpectrum& a, const CorrelationSpectrum& b) {
  detail::require(a.cgrid == b.cgrid, ErrorKind::InvalidArgument, "spectra on different c-grids");
  const std::size_t m = a.cgrid.points;
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(a.sigma[k] - b.sigma[m - 1 - k]));
  return worst;
}

/// The momentum-space eigenfunctions of C are the complex conjugates of the
/// position-space ones, so sigma computed from psi~(p) against conj(eta_c) must
/// match sigma from psi(x). Returns max_c |sigma_x(c) - sigma_p(c)|.
inline double conjugation_property_check(const StateVector& s, const CGrid& cgrid, const TransformOptions& opts = {}) {
  const CorrelationSpectrum sx = correlation_transform(in_position(s), cgrid, opts);
  // transform against conj(eta_c) = eta_{-c}: mirror the c axis
  const CorrelationSpectrum sp = correlation_transform(in_momentum(s), cgrid, opts);
  return max_mirror_difference(sx, sp);
}

}  // namespace corrlab
