#pragma once

// Meijer G-function as an inverse Mellin integral
//
//   G(z) = 1/(2 pi i) \int_C  prod Gamma(c_j + s) prod Gamma(1 - a_j - s)
//                            / ( prod Gamma(b_j + s) prod Gamma(1 - d_j - s) )  z^{-s} ds
//
// The path keeps the poles of Gamma(c_j + s) on its left and those of
// Gamma(1 - a_j - s) on its right. Only real z > 0 and real parameters are
// supported, so the integrand is conjugation symmetric and only the upper
// half of the path is integrated.
//
// A straight vertical line converges far too slowly for the kernel patterns
// (the integrand only decays like a power of |Im s| and oscillates), so the
// path starts vertically at s0, climbs to the height of the steepest-descent
// saddle and then leaves along a parabola bent towards the side on which the
// integrand decays. Along the parabola the decay is super-exponential, which
// makes truncation control trivial: the tail is integrated over doubling
// pieces until a piece is negligible against the L1 mass seen so far.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "special_functions.hpp"

namespace htrm {

struct MeijerGParams {
  std::vector<double> a;  // Gamma(1 - a_j - s), numerator
  std::vector<double> b;  // Gamma(b_j + s), denominator
  std::vector<double> c;  // Gamma(c_j + s), numerator
  std::vector<double> d;  // Gamma(1 - d_j - s), denominator
  cplx z{0.0, 0.0};
};

struct ContourOptions {
  double tolerance = 1e-10;     // tail piece vs accumulated L1 mass
  int max_doublings = 48;
  std::optional<double> s0;     // override the start of the path, must lie in the strip
};

/// Admissible range (left, right) for Re s0; infinite ends when a pole family is empty.
inline std::pair<double, double> separation_strip(const MeijerGParams& p) {
  double left = -std::numeric_limits<double>::infinity();
  double right = std::numeric_limits<double>::infinity();
  for (double c : p.c) left = std::max(left, -c);
  for (double a : p.a) right = std::min(right, 1.0 - a);
  if (!(left < right)) {
    throw ContourSeparationError("meijer_g: left pole " + std::to_string(left) +
                                 " is not left of right pole " + std::to_string(right));
  }
  return {left, right};
}

namespace detail {

struct MellinIntegrand {
  const MeijerGParams& p;
  double log_z;

  cplx log_value(cplx s) const {
    cplx r = -s * log_z;
    for (double c : p.c) r += log_gamma(c + s);
    for (double a : p.a) r += log_gamma(1.0 - a - s);
    for (double b : p.b) r -= log_gamma(b + s);
    for (double d : p.d) r -= log_gamma(1.0 - d - s);
    return r;
  }

  // d/ds of log_value and its derivative, for the saddle refinement.
  cplx dlog(cplx s) const {
    cplx r = -log_z;
    for (double c : p.c) r += digamma(c + s);
    for (double a : p.a) r -= digamma(1.0 - a - s);
    for (double b : p.b) r -= digamma(b + s);
    for (double d : p.d) r += digamma(1.0 - d - s);
    return r;
  }

  cplx d2log(cplx s) const {
    cplx r = 0.0;
    for (double c : p.c) r += trigamma(c + s);
    for (double a : p.a) r += trigamma(1.0 - a - s);
    for (double b : p.b) r -= trigamma(b + s);
    for (double d : p.d) r -= trigamma(1.0 - d - s);
    return r;
  }
};

// Upper-half-plane saddle of the integrand. With p1 = #c - #b and
// p2 = #a - #d the leading balance is k log s = log z - i pi p2 (k = p1 - p2),
// refined by a few Newton steps when they stay in the upper half plane.
inline std::optional<cplx> upper_saddle(const MellinIntegrand& f, int k, int p2) {
  if (k == 0) return std::nullopt;
  using std::numbers::pi;
  double arg = -pi * p2 / k;
  const double turn = 2.0 * pi / std::abs(k);
  while (arg <= 0.0) arg += turn;
  while (arg >= pi) arg -= turn;
  if (arg <= 0.0) return std::nullopt;
  const cplx seed = std::polar(std::exp(f.log_z / k), arg);
  // The balance is asymptotic; near the poles Newton can run off, so only
  // refine large seeds and keep the result only if it stays close.
  if (std::abs(seed) < 2.0) return seed;
  cplx s = seed;
  for (int it = 0; it < 8; ++it) {
    const cplx step = f.dlog(s) / f.d2log(s);
    const cplx next = s - step;
    if (!(next.imag() > 0.0) || !std::isfinite(next.real())) break;
    s = next;
    if (std::abs(step) < 1e-8 * std::max(1.0, std::abs(s))) break;
  }
  if (!(std::abs(s - seed) < 0.5 * std::abs(seed))) return seed;
  return s;
}

}  // namespace detail

inline double meijer_g(const MeijerGParams& p, const ContourOptions& opt = {}) {
  using std::numbers::pi;
  if (p.z.imag() != 0.0 || !(p.z.real() > 0.0)) {
    throw std::invalid_argument("meijer_g: only real positive arguments are supported");
  }
  const double z = p.z.real();
  const auto [left, right] = separation_strip(p);

  const int n_a = static_cast<int>(p.a.size());
  const int n_b = static_cast<int>(p.b.size());
  const int n_c = static_cast<int>(p.c.size());
  const int n_d = static_cast<int>(p.d.size());

  // The integrand decays towards Re s -> -inf when this exponent is negative.
  const int decay = n_a + n_b - n_c - n_d;
  int dir;
  if (decay < 0) {
    dir = -1;
  } else if (decay > 0) {
    dir = 1;
  } else if (z < 1.0) {
    dir = -1;
  } else if (z > 1.0) {
    dir = 1;
  } else {
    throw NonConvergence("meijer_g: balanced pattern at |z| = 1 has no decaying direction");
  }

  detail::MellinIntegrand f{p, std::log(z)};
  const auto saddle = detail::upper_saddle(f, n_c - n_b - (n_a - n_d), n_a - n_d);

  double s0;
  if (opt.s0) {
    s0 = *opt.s0;
    if (!(s0 > left && s0 < right)) {
      throw ContourSeparationError("meijer_g: requested s0 outside the separation strip");
    }
  } else if (std::isfinite(left) && std::isfinite(right)) {
    s0 = 0.5 * (left + right);
  } else if (std::isfinite(left)) {
    // |z^-s| = z^-Re(s): for small z hug the pole so the integrand stays O(1)
    // instead of z^-1/2 with an O(1) result left after cancellation.
    s0 = left + (z < 1.0 ? std::min(0.5, 1.0 / std::abs(std::log(z))) : 0.5);
  } else if (std::isfinite(right)) {
    s0 = right - (z > 1.0 ? std::min(0.5, 1.0 / std::abs(std::log(z))) : 0.5);
  } else {
    s0 = saddle ? saddle->real() : 0.0;
  }

  const double height = saddle ? std::max(1.0, saddle->imag()) : 0.0;
  constexpr double kappa = 0.5;

  auto eval = [&](cplx s, cplx ds) { return (std::exp(f.log_value(s)) * ds).imag() / pi; };
  auto vertical = [&](double t) { return eval(cplx(s0, t), cplx(0.0, 1.0)); };
  auto bent = [&](double u) {
    return eval(cplx(s0 + dir * kappa * u * u, height + u), cplx(2.0 * dir * kappa * u, 1.0));
  };

  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  constexpr unsigned depth = 10;
  const double qtol = std::max(1e-13, 0.1 * opt.tolerance);
  double err = 0.0;
  double l1 = 0.0;
  double piece_l1 = 0.0;
  double total = 0.0;
  if (height > 0.0) {
    total += gk::integrate(vertical, 0.0, height, depth, qtol, &err, &piece_l1);
    l1 += piece_l1;
  }
  double lo = 0.0;
  double hi = 2.0;
  for (int it = 0; it < opt.max_doublings; ++it) {
    const double piece = gk::integrate(bent, lo, hi, depth, qtol, &err, &piece_l1);
    if (!std::isfinite(piece)) throw NonConvergence("meijer_g: non-finite contour integrand");
    total += piece;
    l1 += piece_l1;
    if (it > 0 && piece_l1 <= opt.tolerance * std::max(l1, std::numeric_limits<double>::min())) {
      return total;
    }
    lo = hi;
    hi *= 2.0;
  }
  throw NonConvergence("meijer_g: contour tail did not converge");
}

/// Pattern of the Fuss-Catalan density: Gamma(c_j + s) over Gamma(b_j + s), j = 1..M.
inline MeijerGParams fuss_catalan_pattern(int m, double z) {
  MeijerGParams p;
  for (int j = 1; j <= m; ++j) {
    p.c.push_back(static_cast<double>(j - 1 - m) / (m + 1));
    p.b.push_back(static_cast<double>(1 + j - m) / m);
  }
  p.z = z;
  return p;
}

/// Gamma(s) / Gamma(1 - s)^M, i.e. the entire function 0F_M(;1,...,1;-x).
inline MeijerGParams kernel_left_pattern(int m, double x) {
  MeijerGParams p;
  p.c = {0.0};
  p.d.assign(static_cast<std::size_t>(m), 0.0);
  p.z = x;
  return p;
}

/// Gamma(s)^M / Gamma(1 - s).
inline MeijerGParams kernel_right_pattern(int m, double x) {
  MeijerGParams p;
  p.c.assign(static_cast<std::size_t>(m), 0.0);
  p.d = {0.0};
  p.z = x;
  return p;
}

}  // namespace htrm
