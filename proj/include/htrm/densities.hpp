#pragma once

// Reference curves: macroscopic laws, edge and tail microscopic densities,
// Fuss-Catalan and Meijer G-kernel densities, spacing laws, Cauchy.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "meijer_g.hpp"
#include "special_functions.hpp"

namespace htrm {

enum class Normalization { probability, mean_spacing_one, per_eigenvalue };

inline const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::probability: return "probability";
    case Normalization::mean_spacing_one: return "mean_spacing_one";
    case Normalization::per_eigenvalue: return "per_eigenvalue";
  }
  return "?";
}

/// A curve with its support. The cdf is optional; consumers fall back to quadrature.
struct AnalyticDensity {
  std::string name;
  std::function<double(double)> pdf;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  Normalization normalization = Normalization::probability;
  std::function<double(double)> cdf;

  double operator()(double x) const { return (x < lo || x > hi) ? 0.0 : pdf(x); }
};

namespace detail {
inline void check_product_length(int m) {
  if (m < 1 || m > 4) throw std::invalid_argument("product length M must be in 1..4");
}
}  // namespace detail

inline double mp_density(double lambda) {
  if (!(lambda > 0.0) || lambda >= 4.0) return 0.0;
  return std::sqrt((4.0 - lambda) / lambda) / (2.0 * std::numbers::pi);
}

/// Law of 1/x for x Marchenko-Pastur distributed.
inline double inv_mp_density(double lambda) {
  if (lambda <= 0.25) return 0.0;
  return std::sqrt(4.0 * lambda - 1.0) / (2.0 * std::numbers::pi * lambda * lambda);
}

inline double inv_mp_cdf(double lambda) {
  if (lambda <= 0.25) return 0.0;
  // P(1/u <= lambda) with u Marchenko-Pastur distributed
  const double u = 1.0 / lambda;
  const double mp_cdf =
      (std::sqrt(u * (4.0 - u)) + 2.0 * std::asin((u - 2.0) / 2.0) + std::numbers::pi) / (2.0 * std::numbers::pi);
  return 1.0 - mp_cdf;
}

inline double airy_edge_density(double lambda) {
  const auto [ai, aip] = airy_ai(lambda);
  return aip * aip - lambda * ai * ai;
}

inline double bessel_hard_edge_density(double lambda) {
  if (!(lambda > 0.0)) return 0.0;
  const double x = std::numbers::pi * lambda;
  const double j0 = bessel_j(0, x);
  const double j1 = bessel_j(1, x);
  return 0.5 * std::numbers::pi * std::numbers::pi * lambda * (j0 * j0 + j1 * j1);
}

/// Expected number of hard-edge levels in (0, lambda]: with y = pi lambda,
/// (y^2 (J0^2 + J1^2) - y J0 J1) / 2, which grows like lambda.
inline double bessel_hard_edge_count(double lambda) {
  if (!(lambda > 0.0)) return 0.0;
  const double y = std::numbers::pi * lambda;
  const double j0 = bessel_j(0, y);
  const double j1 = bessel_j(1, y);
  return 0.5 * (y * y * (j0 * j0 + j1 * j1) - y * j0 * j1);
}

inline double inverse_bessel_density(double lambda) {
  if (!(lambda > 0.0)) return 0.0;
  return bessel_hard_edge_density(1.0 / lambda) / (lambda * lambda);
}

/// c_M = Gamma((M+2)/(M+1)) Gamma(M/(M+1))
inline double unfolding_constant(int m) {
  if (m < 1) throw std::invalid_argument("unfolding_constant: M >= 1");
  return std::tgamma((m + 2.0) / (m + 1.0)) * std::tgamma(static_cast<double>(m) / (m + 1.0));
}

/// (n-1)-th moment of the Fuss-Catalan law: Gamma((M+1)n - M) / (Gamma(Mn - M + 2) Gamma(n)).
inline double fuss_catalan_moment(int n, int m) {
  if (n < 1 || m < 1) throw std::domain_error("fuss_catalan_moment: n >= 1 and M >= 1");
  return std::exp(std::lgamma((m + 1.0) * n - m) - std::lgamma(static_cast<double>(m) * n - m + 2.0) -
                  std::lgamma(static_cast<double>(n)));
}

inline double fuss_catalan_edge(int m) { return std::pow(m + 1.0, m + 1.0) / std::pow(m, m); }

inline double fuss_catalan_density(double lambda, int m, const ContourOptions& opt = {}) {
  detail::check_product_length(m);
  const double edge = fuss_catalan_edge(m);
  if (!(lambda > 0.0) || lambda >= edge) return 0.0;
  const double pref = std::pow(m, m - 1.5) / (std::sqrt(2.0 * std::numbers::pi) * std::pow(m + 1.0, m + 0.5));
  return pref * meijer_g(fuss_catalan_pattern(m, lambda / edge), opt);
}

/// Law of 1/x for x Fuss-Catalan distributed: the macroscopic density of N^M Y_1^(M).
/// Equals inv_mp_density for M = 1.
inline double inverse_fuss_catalan_density(double lambda, int m, const ContourOptions& opt = {}) {
  if (!(lambda > 0.0)) return 0.0;
  if (m == 1) return inv_mp_density(lambda);
  return fuss_catalan_density(1.0 / lambda, m, opt) / (lambda * lambda);
}

/// Diagonal of the hard-edge Meijer G-kernel in the unfolded variable, x = (c_M lambda)^(M+1):
/// rho(lambda) = (M+1) c_M^(M+1) lambda^M int_0^1 G_left(t x) G_right(t x) dt.
inline double meijer_kernel_density(double lambda, int m, const ContourOptions& opt = {}) {
  detail::check_product_length(m);
  if (!(lambda > 0.0)) return 0.0;
  const double c = unfolding_constant(m);
  const double x = std::pow(c * lambda, m + 1.0);
  // t = u^2 tames the log^(M-1) singularity of the right factor at t = 0.
  auto integrand = [&](double u) {
    if (!(u > 0.0)) return 0.0;
    const double y = u * u * x;
    return 2.0 * u * meijer_g(kernel_left_pattern(m, y), opt) * meijer_g(kernel_right_pattern(m, y), opt);
  };
  const double k =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 10, 1e-9);
  return (m + 1.0) * std::pow(c, m + 1.0) * std::pow(lambda, static_cast<double>(m)) * k;
}

inline double inverse_meijer_density(double lambda, int m, const ContourOptions& opt = {}) {
  if (!(lambda > 0.0)) return 0.0;
  return meijer_kernel_density(1.0 / lambda, m, opt) / (lambda * lambda);
}

/// Tail law of the L-fold sum in the inverted variable: L^2 rho_inv(L lambda).
/// M = 1 uses the closed Bessel form, larger M the Meijer G-kernel.
inline double tail_density_L(double lambda, int l, int m = 1) {
  if (l < 1) throw std::invalid_argument("tail_density_L: L >= 1");
  const double ll = static_cast<double>(l);
  if (m == 1) return ll * ll * inverse_bessel_density(ll * lambda);
  return ll * ll * inverse_meijer_density(ll * lambda, m);
}

inline double poisson_spacing(double s) { return s < 0.0 ? 0.0 : std::exp(-s); }

inline double poisson_spacing_cdf(double s) { return s < 0.0 ? 0.0 : -std::expm1(-s); }

inline double wigner_surmise(double s) {
  using std::numbers::pi;
  return s < 0.0 ? 0.0 : 32.0 / (pi * pi) * s * s * std::exp(-4.0 * s * s / pi);
}

inline double wigner_surmise_cdf(double s) {
  using std::numbers::pi;
  if (s <= 0.0) return 0.0;
  const double a = 2.0 * s / std::sqrt(pi);
  return std::erf(a) - 4.0 * s / pi * std::exp(-a * a);
}

inline double cauchy_density(double lambda, double c) {
  return c / (std::numbers::pi * (c * c + lambda * lambda));
}

}  // namespace htrm
