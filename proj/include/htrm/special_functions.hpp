#pragma once

// Gamma, digamma, Bessel J0/J1 and Airy Ai/Ai'.
//
// The complex log-gamma is the workhorse of the Meijer G contour integrals:
// reflection for Re z < 1/2, upward recurrence until |z| >= 12, then the
// Stirling series with eight Bernoulli terms (truncation error below 1e-16).
// Imaginary parts are only defined modulo 2*pi, which is all the contour
// integrals need since they exponentiate sums of log-gammas.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <boost/math/special_functions/airy.hpp>

namespace htrm {

using cplx = std::complex<double>;

namespace detail {

inline constexpr std::array<double, 8> kBernoulli2k = {
    1.0 / 6.0,   -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,  -691.0 / 2730.0,  7.0 / 6.0,  -3617.0 / 510.0};

inline constexpr double kStirlingRadius = 12.0;

// cot(w) without overflow for large |Im w|.
inline cplx cot(cplx w) {
  const cplx i(0.0, 1.0);
  if (std::abs(w.imag()) < 1.0) return std::cos(w) / std::sin(w);
  if (w.imag() > 0.0) {
    const cplx e = std::exp(2.0 * i * w);
    return i * (e + 1.0) / (e - 1.0);
  }
  const cplx e = std::exp(-2.0 * i * w);
  return i * (1.0 + e) / (1.0 - e);
}

}  // namespace detail

/// log(sin(pi z)), modulo 2*pi*i, stable for large |Im z|.
inline cplx log_sin_pi(cplx z) {
  using std::numbers::pi;
  const cplx i(0.0, 1.0);
  if (std::abs(z.imag()) < 5.0) return std::log(std::sin(pi * z));
  if (z.imag() > 0.0) {
    return -i * pi * z + std::log(1.0 - std::exp(2.0 * i * pi * z)) + std::log(cplx(0.0, 0.5));
  }
  return i * pi * z + std::log(1.0 - std::exp(-2.0 * i * pi * z)) + std::log(cplx(0.0, -0.5));
}

inline cplx log_gamma(cplx z) {
  using std::numbers::pi;
  if (z.real() < 0.5) return std::log(pi) - log_sin_pi(z) - log_gamma(1.0 - z);

  // Accumulate log(z (z+1) ... ) in blocks so the running product cannot overflow.
  cplx shift = 0.0;
  cplx prod = 1.0;
  int block = 0;
  while (std::abs(z) < detail::kStirlingRadius) {
    prod *= z;
    z += 1.0;
    if (++block == 8) {
      shift += std::log(prod);
      prod = 1.0;
      block = 0;
    }
  }
  shift += std::log(prod);

  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx term = inv;
  cplx series = 0.0;
  for (int k = 1; k <= 8; ++k) {
    series += detail::kBernoulli2k[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * term;
    term *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + series - shift;
}

inline cplx digamma(cplx z) {
  using std::numbers::pi;
  if (z.real() < 0.5) return digamma(1.0 - z) - pi * detail::cot(pi * z);
  cplx acc = 0.0;
  while (std::abs(z) < detail::kStirlingRadius) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const cplx inv2 = 1.0 / (z * z);
  cplx term = inv2;
  cplx series = 0.0;
  for (int k = 1; k <= 8; ++k) {
    series += detail::kBernoulli2k[k - 1] / (2.0 * k) * term;
    term *= inv2;
  }
  return acc + std::log(z) - 0.5 / z - series;
}

inline cplx trigamma(cplx z) {
  using std::numbers::pi;
  if (z.real() < 0.5) {
    const cplx c = detail::cot(pi * z);
    return pi * pi * (1.0 + c * c) - trigamma(1.0 - z);
  }
  cplx acc = 0.0;
  while (std::abs(z) < detail::kStirlingRadius) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx term = inv2 * inv;
  cplx series = 0.0;
  for (int k = 1; k <= 8; ++k) {
    series += detail::kBernoulli2k[k - 1] * term;
    term *= inv2;
  }
  return acc + inv + 0.5 * inv2 + series;
}

inline double gamma_fn(double x) { return std::tgamma(x); }

inline cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

/// J_0 or J_1 at x >= 0.
inline double bessel_j(int order, double x) {
  if (order != 0 && order != 1) throw std::invalid_argument("bessel_j: order must be 0 or 1");
  if (!(x >= 0.0)) throw std::domain_error("bessel_j: x must be non-negative");
  return std::cyl_bessel_j(static_cast<double>(order), x);
}

struct AiryValues {
  double ai;
  double ai_prime;
};

inline AiryValues airy_ai(double x) {
  return {boost::math::airy_ai(x), boost::math::airy_ai_prime(x)};
}

}  // namespace htrm
