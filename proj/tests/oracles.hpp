#pragma once

// Closed-form reference values used by the tests. Nothing here calls into the
// library: every value is an analytic expression evaluated directly.

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;

// Lanczos approximation (g = 7, 9 terms) of log Gamma, with reflection for Re z < 1/2.
inline cplx lgamma(cplx z) {
  constexpr double pi = std::numbers::pi;
  if (z.real() < 0.5) return std::log(pi / std::sin(pi * z)) - lgamma(1.0 - z);
  static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,   -176.61502916214059,   12.507343278686905,
                             -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  z -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
  const cplx t = z + 7.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline cplx gamma(cplx z) { return std::exp(lgamma(z)); }

// psi(x) = (alpha/pi)^{1/4} exp(-(alpha + i beta) x^2 / 2), hbar = 1 unless given.
struct Gaussian {
  double alpha = 1.0;
  double beta = 0.0;
  double hbar = 1.0;

  cplx operator()(double x) const {
    return std::pow(alpha / std::numbers::pi, 0.25) * std::exp(-cplx{alpha, beta} * x * x / 2.0);
  }
  double var_x() const { return 1.0 / (2.0 * alpha); }
  double var_p() const { return hbar * hbar * (alpha * alpha + beta * beta) / (2.0 * alpha); }
  double corr() const { return -hbar * beta / (2.0 * alpha); }
  double energy(double mass = 1.0) const { return var_p() / (2.0 * mass); }
  // |<psi, conj psi>| = |int psi^2 dx|
  double conjugate_fidelity() const { return std::pow(1.0 + beta * beta / (alpha * alpha), -0.25); }
  // var_x(t) for free evolution with hbar = m = 1 and beta = 0.
  double var_x_free(double t) const { return var_x() * (1.0 + alpha * alpha * t * t); }
};

// <eta^g_c, psi> for the centred Gaussian:
//   2 int_0^inf (2 sqrt(hbar pi))^{-1} y^{-1/2 - ic/hbar} N exp(-a y^2/2) dy
//   = N / (2 sqrt(hbar pi)) (a/2)^{-s/2} Gamma(s/2),   s = 1/2 - i c/hbar.
// The odd amplitude vanishes.
inline cplx gaussian_even_amplitude(const Gaussian& g, double c) {
  const cplx s{0.5, -c / g.hbar};
  const cplx a{g.alpha, g.beta};
  const double norm = std::pow(g.alpha / std::numbers::pi, 0.25);
  return norm / (2.0 * std::sqrt(g.hbar * std::numbers::pi)) * std::exp(-s / 2.0 * std::log(a / 2.0)) *
         gamma(s / 2.0);
}

inline double gaussian_sigma(const Gaussian& g, double c) { return std::norm(gaussian_even_amplitude(g, c)); }

// Hermite function of order 1: sqrt(2) pi^{-1/4} x exp(-x^2/2); its odd amplitude,
//   N' / sqrt(hbar pi) int_0^inf y^{1/2 - ic} e^{-y^2/2} dy = N' / (2 sqrt(pi)) 2^{(s+1)/2} Gamma((s+1)/2)
// with s = 1/2 - ic (hbar = 1).
inline cplx hermite1_odd_amplitude(double c) {
  const cplx s{0.5, -c};
  const double norm = std::sqrt(2.0) * std::pow(std::numbers::pi, -0.25);
  return norm / (2.0 * std::sqrt(std::numbers::pi)) * std::exp((s + 1.0) / 2.0 * std::log(2.0)) *
         gamma((s + 1.0) / 2.0);
}

}  // namespace oracle
