#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "corrlab/detail/fft.hpp"
#include "corrlab/error.hpp"

namespace corrlab {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline constexpr std::size_t kMaxDenseGrid = 4096;

/// Symmetric half-offset grid over [-L/2, L/2] and its DFT-conjugate momentum
/// grid. Neither grid contains 0:
///   x_j = (j - n/2 + 1/2) dx,  p_k = (2 pi hbar / L) (k - n/2 + 1/2).
struct SpatialGrid {
  std::size_t n = 0;
  double length = 0.0;
  double hbar = 1.0;
  double mass = 1.0;

  double dx() const { return length / static_cast<double>(n); }
  double dp() const { return 2.0 * std::numbers::pi * hbar / length; }
  double offset() const { return 0.5 * static_cast<double>(n) - 0.5; }
  double x(std::size_t j) const { return (static_cast<double>(j) - offset()) * dx(); }
  double p(std::size_t k) const { return (static_cast<double>(k) - offset()) * dp(); }

  std::vector<double> points() const {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = x(j);
    return out;
  }

  std::vector<double> pvals() const {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = p(k);
    return out;
  }

  // Indices of the outermost n/8 points on either side.
  bool in_outer_quarter(std::size_t j) const { return j < n / 8 || j >= n - n / 8; }

  bool operator==(const SpatialGrid&) const = default;
};

inline SpatialGrid make_grid(std::size_t n, double length, double hbar = 1.0, double mass = 1.0) {
  using detail::require;
  require(n >= 8 && (n & (n - 1)) == 0, ErrorKind::InvalidArgument,
          "grid size must be a power of two >= 8, got " + std::to_string(n));
  require(std::isfinite(length) && length > 0.0, ErrorKind::InvalidArgument, "grid length must be positive");
  require(std::isfinite(hbar) && hbar > 0.0, ErrorKind::InvalidArgument, "hbar must be positive");
  require(std::isfinite(mass) && mass > 0.0, ErrorKind::InvalidArgument, "mass must be positive");
  return SpatialGrid{n, length, hbar, mass};
}

enum class Representation { Position, Momentum };

inline const char* to_string(Representation r) {
  return r == Representation::Position ? "position" : "momentum";
}

/// Sampled wavefunction. In position representation amp[j] = psi(x_j), in
/// momentum representation amp[k] = psi~(p_k); the norm is the grid quadrature
/// sum |amp|^2 times dx (resp. dp).
struct StateVector {
  SpatialGrid grid;
  cvec amp;
  Representation rep = Representation::Position;

  std::size_t size() const { return amp.size(); }
  double step() const { return rep == Representation::Position ? grid.dx() : grid.dp(); }
  double coordinate(std::size_t j) const { return rep == Representation::Position ? grid.x(j) : grid.p(j); }

  double norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amp) acc += std::norm(a);
    return acc * step();
  }
  double norm() const { return std::sqrt(norm_squared()); }
};

namespace detail {

// exp(i pi (n-1) j / n), reduced exactly in integers before the trig call.
inline cplx half_offset_phase(std::size_t n, std::size_t j) {
  const std::size_t r = ((n - 1) * j) % (2 * n);
  return std::polar(1.0, std::numbers::pi * static_cast<double>(r) / static_cast<double>(n));
}

// exp(-2 pi i c^2 / n) with c = (n-1)/2.
inline cplx half_offset_global(std::size_t n) {
  const std::size_t r = ((n - 1) * (n - 1)) % (4 * n);
  return std::polar(1.0, -std::numbers::pi * static_cast<double>(r) / (2.0 * static_cast<double>(n)));
}

inline void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  require(a == b, ErrorKind::GridMismatch, "states live on different grids");
}

}  // namespace detail

inline StateVector make_state(const SpatialGrid& grid, cvec amp, Representation rep = Representation::Position) {
  detail::require(amp.size() == grid.n, ErrorKind::InvalidArgument, "amplitude count does not match grid size");
  return StateVector{grid, std::move(amp), rep};
}

/// psi~(p) = (2 pi hbar)^{-1/2} sum_j exp(-i p x_j / hbar) psi(x_j) dx, realized as
/// a phase-corrected DFT. Exactly unitary between the two quadrature norms.
inline StateVector to_momentum(const StateVector& s) {
  detail::require(s.rep == Representation::Position, ErrorKind::RepresentationMismatch,
                  "to_momentum expects a position-representation state");
  const std::size_t n = s.grid.n;
  cvec buf(n);
  for (std::size_t j = 0; j < n; ++j) buf[j] = s.amp[j] * detail::half_offset_phase(n, j);
  detail::fft_forward(buf);
  const cplx pre = detail::half_offset_global(n) * (s.grid.dx() / std::sqrt(2.0 * std::numbers::pi * s.grid.hbar));
  for (std::size_t k = 0; k < n; ++k) buf[k] *= pre * detail::half_offset_phase(n, k);
  return StateVector{s.grid, std::move(buf), Representation::Momentum};
}

inline StateVector to_position(const StateVector& s) {
  detail::require(s.rep == Representation::Momentum, ErrorKind::RepresentationMismatch,
                  "to_position expects a momentum-representation state");
  const std::size_t n = s.grid.n;
  cvec buf(n);
  for (std::size_t k = 0; k < n; ++k) buf[k] = s.amp[k] * std::conj(detail::half_offset_phase(n, k));
  detail::fft_backward(buf);
  const cplx pre =
      std::conj(detail::half_offset_global(n)) * (s.grid.dp() / std::sqrt(2.0 * std::numbers::pi * s.grid.hbar));
  for (std::size_t j = 0; j < n; ++j) buf[j] *= pre * std::conj(detail::half_offset_phase(n, j));
  return StateVector{s.grid, std::move(buf), Representation::Position};
}

inline StateVector in_position(const StateVector& s) {
  return s.rep == Representation::Position ? s : to_position(s);
}

inline StateVector in_momentum(const StateVector& s) {
  return s.rep == Representation::Momentum ? s : to_momentum(s);
}

/// Grid quadrature of <a, b>, antilinear in the first slot.
inline cplx inner(const StateVector& a, const StateVector& b) {
  detail::require_same_grid(a.grid, b.grid);
  detail::require(a.rep == b.rep, ErrorKind::RepresentationMismatch, "inner product across representations");
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::conj(a.amp[j]) * b.amp[j];
  return acc * a.step();
}

inline StateVector normalized(StateVector s) {
  const double nrm = s.norm();
  detail::require(nrm > 0.0 && std::isfinite(nrm), ErrorKind::InvalidArgument, "cannot normalize a zero state");
  for (auto& a : s.amp) a /= nrm;
  return s;
}

/// Complex conjugate of the position wavefunction (time reversal).
inline StateVector conjugate(const StateVector& s) {
  StateVector out = in_position(s);
  for (auto& a : out.amp) a = std::conj(a);
  return s.rep == Representation::Position ? out : to_momentum(out);
}

// Largest modulus over the outer quarter of the grid in the state's own representation.
inline double outer_amplitude(const StateVector& s) {
  double worst = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s.grid.in_outer_quarter(j)) worst = std::max(worst, std::abs(s.amp[j]));
  return worst;
}

inline double outer_mass(const StateVector& s) {
  double acc = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s.grid.in_outer_quarter(j)) acc += std::norm(s.amp[j]);
  return acc * s.step();
}

/// Max of the outer-quarter moduli in both representations.
inline double boundary_amplitude(const StateVector& s) {
  return std::max(outer_amplitude(in_position(s)), outer_amplitude(in_momentum(s)));
}

/// Max of the outer-quarter masses in both representations.
inline double boundary_mass(const StateVector& s) {
  return std::max(outer_mass(in_position(s)), outer_mass(in_momentum(s)));
}

inline constexpr double kInteriorAmplitude = 1e-12;

inline bool is_interior_supported(const StateVector& s, double threshold = kInteriorAmplitude) {
  return boundary_amplitude(s) < threshold;
}

inline void require_interior(const StateVector& s, const char* what) {
  const double b = boundary_amplitude(s);
  detail::require(b < kInteriorAmplitude, ErrorKind::SupportViolation,
                  std::string(what) + ": state is not interior-supported (outer-quarter amplitude " +
                      std::to_string(b) + ")");
}

}  // namespace corrlab
