#pragma once

// Empirical Green function and numerical R- and S-transforms.
//
// G(z) = mean 1/(z - lambda) over pooled eigenvalues (macroscopic variable).
// R(y) = z(y) - 1/y where G(z(y)) = y, found by damped Newton that keeps
// Im z > 0 (the Herglotz sector). S(chi) solves u R(chi u) = 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"

namespace htrm {

using cplx = std::complex<double>;

class EmpiricalGreen {
 public:
  EmpiricalGreen() = default;
  explicit EmpiricalGreen(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("EmpiricalGreen: no eigenvalues");
    std::sort(values_.begin(), values_.end());
  }

  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }

  cplx operator()(cplx z) const {
    cplx s = 0.0;
    for (double l : values_) s += 1.0 / (z - l);
    return s / static_cast<double>(values_.size());
  }

  /// G and G' together.
  std::pair<cplx, cplx> with_derivative(cplx z) const {
    cplx g = 0.0;
    cplx dg = 0.0;
    for (double l : values_) {
      const cplx r = 1.0 / (z - l);
      g += r;
      dg -= r * r;
    }
    const double n = static_cast<double>(values_.size());
    return {g / n, dg / n};
  }

  /// Complex root of G(z) = y with Im z > 0, seeded at z0.
  std::optional<cplx> solve(cplx y, cplx z0) const {
    if (!(y.imag() < 0.0)) throw std::domain_error("EmpiricalGreen::solve needs Im y < 0");
    cplx z = z0.imag() > 0.0 ? z0 : cplx(z0.real(), 1.0);
    for (int it = 0; it < 200; ++it) {
      const auto [g, dg] = with_derivative(z);
      const cplx res = g - y;
      if (std::abs(res) <= 1e-13 * std::abs(y)) return z;
      cplx step = res / dg;
      // damp until the residual drops and z stays in the upper half plane
      double t = 1.0;
      for (int k = 0; k < 40; ++k, t *= 0.5) {
        const cplx next = z - t * step;
        if (next.imag() > 0.0 && std::abs((*this)(next) - y) < std::abs(res)) {
          z = next;
          break;
        }
        if (k == 39) return std::nullopt;
      }
    }
    return std::nullopt;
  }

  /// Real root z < min eigenvalue of G(z) = y for y < 0. Left of the spectrum G
  /// falls from 0 (z -> -inf) to -inf (z -> min), so f = G - y changes sign once.
  double solve_real(double y) const {
    if (!(y < 0.0)) throw std::domain_error("EmpiricalGreen::solve_real needs y < 0");
    const double top = values_.front();
    auto f = [&](double z) { return (*this)(cplx(z, 0.0)).real() - y; };
    double lo = top - 1.0;
    while (f(lo) < 0.0) {
      lo = top - 2.0 * (top - lo);
      if (!std::isfinite(lo)) throw NonConvergence("solve_real: no bracket");
    }
    double hi = top - 1e-12 * std::max(1.0, std::abs(top));
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  }

 private:
  std::vector<double> values_;
};

inline cplx empirical_green(const std::vector<double>& values, cplx z) { return EmpiricalGreen(values)(z); }

/// -exp(i pi/(M+1)) y^(-M/(M+1)) with arg y in [-pi, 0); the upper half plane by reflection.
inline cplx r_transform_heavy_tail(cplx y, int m) {
  using std::numbers::pi;
  if (y.imag() > 0.0) return std::conj(r_transform_heavy_tail(std::conj(y), m));
  double arg = std::arg(y);
  if (arg >= 0.0) arg = -pi;  // negative real axis (and +0) taken from below
  const double p = -static_cast<double>(m) / (m + 1.0);
  const cplx yp = std::polar(std::pow(std::abs(y), p), p * arg);
  return -std::polar(1.0, pi / (m + 1.0)) * yp;
}

struct RPoint {
  cplx y;
  std::optional<cplx> r;  // empty when the root finder failed (flagged, never silently dropped)
};

/// R(y) = z - 1/y from the empirical Green function; the seed is the
/// asymptotic branch z ~ 1/y unless a better one is given.
inline std::optional<cplx> r_transform_numeric(const EmpiricalGreen& g, cplx y, std::optional<cplx> seed = {}) {
  const cplx z0 = seed ? *seed : 1.0 / y;
  const auto z = g.solve(y, z0);
  if (!z) return std::nullopt;
  return *z - 1.0 / y;
}

/// Real-axis version for y < 0, where z(y) lies left of the spectrum.
inline double r_transform_numeric_real(const EmpiricalGreen& g, double y) { return g.solve_real(y) - 1.0 / y; }

struct DeviationReport {
  double max_rel_dev = 0.0;
  std::size_t used = 0;
  std::size_t flagged = 0;
  std::vector<RPoint> points;
};

/// Max |R_num(y) / R_ref(y) - 1| over the grid, seeded from the reference branch.
inline DeviationReport r_deviation(const EmpiricalGreen& g, const std::vector<cplx>& ygrid,
                                   const std::function<cplx(cplx)>& reference) {
  DeviationReport out;
  for (cplx y : ygrid) {
    const cplx ref = reference(y);
    const auto r = r_transform_numeric(g, y, ref + 1.0 / y);
    out.points.push_back({y, r});
    if (!r) {
      ++out.flagged;
      continue;
    }
    ++out.used;
    out.max_rel_dev = std::max(out.max_rel_dev, std::abs(*r / ref - 1.0));
  }
  return out;
}

/// R_{A+B} against R_A + R_B on the grid.
inline DeviationReport check_r_additivity(const EmpiricalGreen& a, const EmpiricalGreen& b, const EmpiricalGreen& sum,
                                          const std::vector<cplx>& ygrid) {
  DeviationReport out;
  for (cplx y : ygrid) {
    const auto ra = r_transform_numeric(a, y);
    const auto rb = r_transform_numeric(b, y);
    const auto rs = r_transform_numeric(sum, y, ra && rb ? std::optional<cplx>(*ra + *rb + 1.0 / y) : std::nullopt);
    out.points.push_back({y, rs});
    if (!ra || !rb || !rs) {
      ++out.flagged;
      continue;
    }
    ++out.used;
    out.max_rel_dev = std::max(out.max_rel_dev, std::abs(*rs / (*ra + *rb) - 1.0));
  }
  return out;
}

/// R_{mu A}(y) against mu R_A(mu y).
inline DeviationReport check_r_scaling(const EmpiricalGreen& a, const EmpiricalGreen& scaled, double mu,
                                       const std::vector<cplx>& ygrid) {
  DeviationReport out;
  for (cplx y : ygrid) {
    const auto ra = r_transform_numeric(a, mu * y);
    const auto rs = r_transform_numeric(scaled, y, ra ? std::optional<cplx>(mu * *ra + 1.0 / y) : std::nullopt);
    out.points.push_back({y, rs});
    if (!ra || !rs) {
      ++out.flagged;
      continue;
    }
    ++out.used;
    out.max_rel_dev = std::max(out.max_rel_dev, std::abs(*rs / (mu * *ra) - 1.0));
  }
  return out;
}

/// S(chi) for chi in (-1, 0): the root u > 0 of u R(chi u) = 1, with R evaluated on the negative real axis.
inline double s_transform_numeric(const std::function<double(double)>& r_real, double chi) {
  if (!(chi > -1.0 && chi < 0.0)) throw std::domain_error("s_transform_numeric: chi in (-1, 0)");
  auto f = [&](double u) { return u * r_real(chi * u) - 1.0; };
  double lo = 1e-3;
  double hi = 1.0;
  while (f(lo) > 0.0 && lo > 1e-12) lo *= 0.1;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw NonConvergence("s_transform_numeric: no bracket");
  }
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(45), iters);
  return 0.5 * (r.first + r.second);
}

/// Lower-half-plane y points whose reference preimage z(y) = R(y) + 1/y has Im z >= min_im_z.
inline std::vector<cplx> heavy_tail_y_grid(int m, double min_im_z = 0.1, std::size_t count = 10) {
  using std::numbers::pi;
  std::vector<cplx> out;
  for (double r : {0.15, 0.25, 0.4, 0.6}) {
    for (double theta : {0.3, 0.45, 0.6, 0.75}) {
      const cplx y = std::polar(r, -pi * theta);
      const cplx z = r_transform_heavy_tail(y, m) + 1.0 / y;
      if (z.imag() >= min_im_z) out.push_back(y);
      if (out.size() == count) return out;
    }
  }
  return out;
}

}  // namespace htrm
