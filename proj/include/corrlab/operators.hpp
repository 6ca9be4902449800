#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"

namespace corrlab {

using DenseMatrix = Eigen::MatrixXcd;

enum class OperatorKind { X, P, C, H, Parity, Drs, Custom };

struct OperatorTag {
  OperatorKind kind = OperatorKind::Custom;
  int r = 0;
  int s = 0;

  bool operator==(const OperatorTag&) const = default;
};

/// Dense matrix acting on position-representation amplitude vectors.
struct OperatorMatrix {
  SpatialGrid grid;
  DenseMatrix mat;
  OperatorTag tag;

  std::size_t size() const { return static_cast<std::size_t>(mat.rows()); }
};

namespace detail {

inline void require_dense_grid(const SpatialGrid& grid) {
  require(grid.n <= kMaxDenseGrid, ErrorKind::InvalidArgument,
          "dense operators are limited to n <= " + std::to_string(kMaxDenseGrid));
}

inline Eigen::VectorXcd as_vector(const cvec& v) {
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline cvec as_cvec(const Eigen::VectorXcd& v) { return cvec(v.data(), v.data() + v.size()); }

// Toeplitz symbol T(m), m = -(n-1)..n-1, of U^dagger diag(f(p_k)) U where U is the
// to_momentum unitary: T(m) = (1/n) sum_k f(p_k) exp(2 pi i (k - c) m / n).
// Exactly Hermitian; exactly real (imaginary) when f is even (odd) on the grid.
inline cvec momentum_symbol(const SpatialGrid& grid, const std::function<double(double)>& f) {
  const std::size_t n = grid.n;
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = f(grid.p(k));
  bool even = true;
  bool odd = true;
  for (std::size_t k = 0; k < n; ++k) {
    even = even && values[k] == values[n - 1 - k];
    odd = odd && values[k] == -values[n - 1 - k];
  }

  cvec sums(values.begin(), values.end());
  fft_backward(sums);

  cvec symbol(2 * n - 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t r = ((n - 1) * m) % (2 * n);
    cplx t = std::polar(1.0, -std::numbers::pi * static_cast<double>(r) / static_cast<double>(n)) * sums[m] * inv_n;
    if (even) t = {t.real(), 0.0};
    if (odd) t = {0.0, t.imag()};
    symbol[n - 1 + m] = t;
    symbol[n - 1 - m] = std::conj(t);
  }
  if (odd) symbol[n - 1] = {0.0, 0.0};
  symbol[n - 1] = {symbol[n - 1].real(), 0.0};
  return symbol;
}

inline DenseMatrix toeplitz(const cvec& symbol, std::size_t n) {
  DenseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = symbol[n - 1 + j - l];
  return m;
}

inline double ipow(double x, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= x;
  return acc;
}

inline double polyval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

inline std::vector<double> polyder(std::span<const double> coeffs) {
  std::vector<double> out;
  for (std::size_t k = 1; k < coeffs.size(); ++k) out.push_back(static_cast<double>(k) * coeffs[k]);
  return out;
}

}  // namespace detail

/// Operator f(P) = U^dagger diag(f(p_k)) U for an arbitrary real symbol f.
inline OperatorMatrix build_momentum_function(const SpatialGrid& grid, const std::function<double(double)>& f,
                                              OperatorTag tag = {}) {
  detail::require_dense_grid(grid);
  return {grid, detail::toeplitz(detail::momentum_symbol(grid, f), grid.n), tag};
}

/// Operator f(X), diagonal in the position basis.
inline OperatorMatrix build_position_function(const SpatialGrid& grid, const std::function<double(double)>& f,
                                              OperatorTag tag = {}) {
  detail::require_dense_grid(grid);
  const auto n = static_cast<Eigen::Index>(grid.n);
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(j, j) = f(grid.x(static_cast<std::size_t>(j)));
  return {grid, std::move(m), tag};
}

inline OperatorMatrix build_x(const SpatialGrid& grid) {
  return build_position_function(grid, [](double x) { return x; }, {OperatorKind::X});
}

inline OperatorMatrix build_x_power(const SpatialGrid& grid, int power) {
  return build_position_function(grid, [power](double x) { return detail::ipow(x, power); }, {});
}

inline OperatorMatrix build_p(const SpatialGrid& grid) {
  return build_momentum_function(grid, [](double p) { return p; }, {OperatorKind::P});
}

// Spectral power P^s (diagonal in momentum), not the s-fold matrix product.
inline OperatorMatrix build_p_power(const SpatialGrid& grid, int power) {
  return build_momentum_function(grid, [power](double p) { return detail::ipow(p, power); }, {});
}

inline OperatorMatrix build_hamiltonian(const SpatialGrid& grid) {
  const double two_m = 2.0 * grid.mass;
  return build_momentum_function(grid, [two_m](double p) { return p * p / two_m; }, {OperatorKind::H});
}

/// C = (XP + PX)/2. Entrywise C_jl = (x_j + x_l)/2 * P_jl, Hermitian by construction.
inline OperatorMatrix build_correlation(const SpatialGrid& grid) {
  OperatorMatrix p = build_p(grid);
  const std::size_t n = grid.n;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      p.mat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) *= 0.5 * (grid.x(j) + grid.x(l));
  p.tag = {OperatorKind::C};
  return p;
}

inline OperatorMatrix build_parity(const SpatialGrid& grid) {
  detail::require_dense_grid(grid);
  const auto n = static_cast<Eigen::Index>(grid.n);
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(j, n - 1 - j) = 1.0;
  return {grid, std::move(m), {OperatorKind::Parity}};
}

inline constexpr int kMaxDrsOrder = 4;

/// D_rs = X^r P^s + P^s X^r.
inline OperatorMatrix build_drs(const SpatialGrid& grid, int r, int s) {
  detail::require(r >= 0 && s >= 0, ErrorKind::InvalidArgument, "D_rs orders must be nonnegative");
  detail::require(r + s <= kMaxDrsOrder, ErrorKind::InvalidArgument,
                  "D_rs requires r + s <= " + std::to_string(kMaxDrsOrder));
  OperatorMatrix ps = build_p_power(grid, s);
  const std::size_t n = grid.n;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      ps.mat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) *=
          detail::ipow(grid.x(j), r) + detail::ipow(grid.x(l), r);
  ps.tag = {OperatorKind::Drs, r, s};
  return ps;
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  detail::require_same_grid(a.grid, b.grid);
  DenseMatrix m = a.mat * b.mat - b.mat * a.mat;
  return {a.grid, std::move(m), {}};
}

inline double hermiticity_residual(const OperatorMatrix& op) {
  return (op.mat - op.mat.adjoint()).cwiseAbs().maxCoeff();
}

inline StateVector apply(const OperatorMatrix& op, const StateVector& s) {
  detail::require_same_grid(op.grid, s.grid);
  const StateVector pos = in_position(s);
  return StateVector{s.grid, detail::as_cvec(op.mat * detail::as_vector(pos.amp)), Representation::Position};
}

/// <psi, A psi> by grid quadrature.
inline cplx expectation(const OperatorMatrix& op, const StateVector& s) {
  const StateVector pos = in_position(s);
  return inner(pos, apply(op, pos));
}

// ---------------------------------------------------------------------------
// Algebraic identity residuals. The finite truncation cannot satisfy
// [X,P] = i hbar globally (trace obstruction), so every identity is checked as
// ||(lhs - rhs) probe|| on an interior-supported probe.
// ---------------------------------------------------------------------------

struct XPower {
  int n = 1;
};
struct PPower {
  int n = 1;
};
struct DrsPair {
  int r = 1;
  int s = 1;
};
using LadderKind = std::variant<XPower, PPower, DrsPair>;

enum class PolySide { FofX, GofP };

namespace detail {

inline double residual_norm(const Eigen::VectorXcd& v, double dx) { return std::sqrt(v.squaredNorm() * dx); }

inline Eigen::VectorXcd probe_vector(const SpatialGrid& grid, const StateVector& probe, const char* what) {
  require_same_grid(grid, probe.grid);
  require_interior(probe, what);
  return as_vector(in_position(probe).amp);
}

// [diag(d), M] psi computed entrywise: sum_l (d_j - d_l) M_jl psi_l.
inline Eigen::VectorXcd diag_commutator_apply(const std::vector<double>& d, const DenseMatrix& m,
                                              const Eigen::VectorXcd& psi) {
  const auto n = m.rows();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const cplx pl = psi(l);
    const double dl = d[static_cast<std::size_t>(l)];
    for (Eigen::Index j = 0; j < n; ++j) out(j) += (d[static_cast<std::size_t>(j)] - dl) * m(j, l) * pl;
  }
  return out;
}

}  // namespace detail

/// ||([B, C] - i hbar k B) probe|| with k = n for X^n, -n for P^n and r - s for D_rs.
inline double ladder_residual(const SpatialGrid& grid, const LadderKind& kind, const StateVector& probe) {
  const Eigen::VectorXcd psi = detail::probe_vector(grid, probe, "ladder_residual");
  const OperatorMatrix c = build_correlation(grid);
  const cplx ih{0.0, grid.hbar};
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, XPower>) {
          detail::require(k.n >= 0 && k.n <= kMaxDrsOrder, ErrorKind::InvalidArgument, "X^n power out of range");
          std::vector<double> xn(grid.n);
          for (std::size_t j = 0; j < grid.n; ++j) xn[j] = detail::ipow(grid.x(j), k.n);
          Eigen::VectorXcd v = detail::diag_commutator_apply(xn, c.mat, psi);
          for (std::size_t j = 0; j < grid.n; ++j)
            v(static_cast<Eigen::Index>(j)) -= ih * static_cast<double>(k.n) * xn[j] * psi(static_cast<Eigen::Index>(j));
          return detail::residual_norm(v, grid.dx());
        } else if constexpr (std::is_same_v<K, PPower>) {
          detail::require(k.n >= 0 && k.n <= kMaxDrsOrder, ErrorKind::InvalidArgument, "P^n power out of range");
          const OperatorMatrix b = build_p_power(grid, k.n);
          const Eigen::VectorXcd bpsi = b.mat * psi;
          Eigen::VectorXcd v = b.mat * (c.mat * psi) - c.mat * bpsi + ih * static_cast<double>(k.n) * bpsi;
          return detail::residual_norm(v, grid.dx());
        } else {
          const OperatorMatrix b = build_drs(grid, k.r, k.s);
          const Eigen::VectorXcd bpsi = b.mat * psi;
          Eigen::VectorXcd v = b.mat * (c.mat * psi) - c.mat * bpsi - ih * static_cast<double>(k.r - k.s) * bpsi;
          return detail::residual_norm(v, grid.dx());
        }
      },
      kind);
}

/// ||([F(X), P] - i hbar F'(X)) probe|| or ||([G(P), X] + i hbar G'(P)) probe||
/// for polynomial F, G given by ascending coefficients (degree <= 4).
inline double deriv_commutator_residual(const SpatialGrid& grid, std::span<const double> coeffs, PolySide which,
                                        const StateVector& probe) {
  detail::require(!coeffs.empty() && coeffs.size() <= 5, ErrorKind::InvalidArgument,
                  "polynomial degree must be between 0 and 4");
  const Eigen::VectorXcd psi = detail::probe_vector(grid, probe, "deriv_commutator_residual");
  const std::vector<double> deriv = detail::polyder(coeffs);
  const std::vector<double> poly(coeffs.begin(), coeffs.end());
  const cplx ih{0.0, grid.hbar};
  if (which == PolySide::FofX) {
    std::vector<double> f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) f[j] = detail::polyval(poly, grid.x(j));
    const OperatorMatrix p = build_p(grid);
    Eigen::VectorXcd v = detail::diag_commutator_apply(f, p.mat, psi);
    for (std::size_t j = 0; j < grid.n; ++j)
      v(static_cast<Eigen::Index>(j)) -= ih * detail::polyval(deriv, grid.x(j)) * psi(static_cast<Eigen::Index>(j));
    return detail::residual_norm(v, grid.dx());
  }
  const OperatorMatrix g = build_momentum_function(grid, [&](double p) { return detail::polyval(poly, p); });
  const OperatorMatrix gd = build_momentum_function(grid, [&](double p) { return detail::polyval(deriv, p); });
  std::vector<double> x = grid.points();
  // [G, X] = -[X, G]
  Eigen::VectorXcd v = -detail::diag_commutator_apply(x, g.mat, psi) + ih * (gd.mat * psi);
  return detail::residual_norm(v, grid.dx());
}

/// ||([X, P] - i hbar) probe||.
inline double xp_commutator_residual(const SpatialGrid& grid, const StateVector& probe) {
  const Eigen::VectorXcd psi = detail::probe_vector(grid, probe, "xp_commutator_residual");
  const OperatorMatrix p = build_p(grid);
  Eigen::VectorXcd v = detail::diag_commutator_apply(grid.points(), p.mat, psi) - cplx{0.0, grid.hbar} * psi;
  return detail::residual_norm(v, grid.dx());
}

enum class ZeroPointForm { PX, XP };

/// ||(C - PX - i hbar/2) probe|| (or the equivalent XP - i hbar/2 form).
inline double zero_point_residual(const SpatialGrid& grid, const StateVector& probe,
                                  ZeroPointForm form = ZeroPointForm::PX) {
  const Eigen::VectorXcd psi = detail::probe_vector(grid, probe, "zero_point_residual");
  const OperatorMatrix c = build_correlation(grid);
  const OperatorMatrix p = build_p(grid);
  Eigen::VectorXcd xpsi = psi;
  for (std::size_t j = 0; j < grid.n; ++j) xpsi(static_cast<Eigen::Index>(j)) *= grid.x(j);
  const cplx half_ih{0.0, 0.5 * grid.hbar};
  Eigen::VectorXcd v;
  if (form == ZeroPointForm::PX) {
    v = c.mat * psi - p.mat * xpsi - half_ih * psi;
  } else {
    Eigen::VectorXcd xp = p.mat * psi;
    for (std::size_t j = 0; j < grid.n; ++j) xp(static_cast<Eigen::Index>(j)) *= grid.x(j);
    v = c.mat * psi - xp + half_ih * psi;
  }
  return detail::residual_norm(v, grid.dx());
}

// ---------------------------------------------------------------------------
// Mutually unbiased bases
// ---------------------------------------------------------------------------

struct OverlapRange {
  double min = 0.0;
  double max = 0.0;
};

inline double orthonormality_residual(const DenseMatrix& basis) {
  const auto k = basis.cols();
  return (basis.adjoint() * basis - DenseMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

/// Min and max of |<a_i, b_j>| over all column pairs (Euclidean inner product).
/// Unbiased bases have min = max = n^{-1/2}.
inline OverlapRange mub_check(const DenseMatrix& basis_a, const DenseMatrix& basis_b) {
  detail::require(basis_a.rows() == basis_b.rows() && basis_a.cols() == basis_a.rows() &&
                      basis_b.cols() == basis_b.rows(),
                  ErrorKind::InvalidArgument, "mub_check expects two square bases of equal dimension");
  detail::require(orthonormality_residual(basis_a) <= 1e-10 && orthonormality_residual(basis_b) <= 1e-10,
                  ErrorKind::InvalidArgument, "mub_check inputs must be orthonormal");
  const Eigen::MatrixXd overlaps = (basis_a.adjoint() * basis_b).cwiseAbs();
  return {overlaps.minCoeff(), overlaps.maxCoeff()};
}

struct Eigensystem {
  Eigen::VectorXd values;
  DenseMatrix vectors;
};

/// Eigenvalues ascending, eigenvectors as orthonormal columns.
inline Eigensystem eigensystem(const OperatorMatrix& op) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(op.mat);
  detail::require(solver.info() == Eigen::Success, ErrorKind::DiscretizationFailure, "eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace corrlab
