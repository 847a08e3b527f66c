#pragma once

// One-sided alpha-stable law with Fourier transform
//
//   E exp(i w X) = exp( -(-i w)^a / cos(pi a / 2) ),   0 < a < 1,
//
// equivalently Laplace transform E exp(-t X) = exp(-t^a / cos(pi a / 2)).
// X = k S where S is the standard positive stable law (Laplace exp(-t^a))
// and k = cos(pi a / 2)^(-1/a). S is drawn with Kanter's representation,
// the beta = 1 case of Chambers-Mallows-Stuck:
//
//   S = (A(U) / E)^((1 - a)/a),  U ~ U(0, pi),  E ~ Exp(1),
//   A(u) = [ sin(a u)^a sin((1 - a) u)^(1 - a) / sin u ]^(1/(1 - a)).
//
// The density uses Zolotarev's integral over the same A(u) at moderate x
// and the convergent large-x series otherwise.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rng.hpp"
#include "special_functions.hpp"

namespace htrm {

struct StableSpec {
  double alpha_tilde = 0.5;
};

class OneSidedStable {
 public:
  explicit OneSidedStable(StableSpec spec) : a_(spec.alpha_tilde) {
    if (!(a_ > 0.0 && a_ < 1.0)) throw std::invalid_argument("one-sided stable law needs 0 < alpha_tilde < 1");
    scale_ = std::pow(std::cos(std::numbers::pi * a_ / 2.0), -1.0 / a_);
  }

  double alpha_tilde() const { return a_; }
  double scale() const { return scale_; }

  std::complex<double> cf(double omega) const {
    using std::numbers::pi;
    if (omega == 0.0) return 1.0;
    const double sign = omega > 0.0 ? 1.0 : -1.0;
    const cplx power = std::polar(std::pow(std::abs(omega), a_), -a_ * (pi / 2.0) * sign);
    return std::exp(-power / std::cos(pi * a_ / 2.0));
  }

  /// Same formula continued to complex omega in the upper half plane.
  std::complex<double> cf(cplx omega) const {
    using std::numbers::pi;
    const cplx w = cplx(0.0, -1.0) * omega;  // -i omega, Re w >= 0 on the closed upper half plane
    return std::exp(-std::pow(w, a_) / std::cos(pi * a_ / 2.0));
  }

  double laplace(double t) const {
    return std::exp(-std::pow(t, a_) / std::cos(std::numbers::pi * a_ / 2.0));
  }

  template <class Rng>
  double sample(Rng& rng) const {
    using std::numbers::pi;
    std::uniform_real_distribution<double> uni(0.0, pi);
    std::exponential_distribution<double> expo(1.0);
    double u;
    do {
      u = uni(rng);
    } while (!(u > 0.0));
    const double e = expo(rng);
    return scale_ * std::pow(kanter(u) / e, (1.0 - a_) / a_);
  }

  double pdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    const double s = x / scale_;
    if (in_series_region(x)) return series_standard(s) / scale_;
    return zolotarev_standard(s) / scale_;
  }

  /// Coefficients of p(x) = sum_k coef(k) x^(-k a - 1), valid for all x > 0.
  double series_coefficient(int k) const {
    using std::numbers::pi;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    return sign / pi * std::exp(std::lgamma(k * a_ + 1.0) - std::lgamma(k + 1.0)) *
           std::sin(k * pi * a_) * std::pow(scale_, k * a_);
  }

  /// Where the large-x series is used: (x / scale)^(-a) <= 1/4.
  double series_threshold() const { return scale_ * std::pow(4.0, 1.0 / a_); }
  bool in_series_region(double x) const { return x >= series_threshold(); }

  /// p(x) ~ tail_constant() x^(-1-a)
  double tail_constant() const {
    return a_ / (std::cos(std::numbers::pi * a_ / 2.0) * std::tgamma(1.0 - a_));
  }

 private:
  double kanter(double u) const {
    const double num = std::pow(std::sin(a_ * u), a_) * std::pow(std::sin((1.0 - a_) * u), 1.0 - a_);
    return std::pow(num / std::sin(u), 1.0 / (1.0 - a_));
  }

  double series_standard(double s) const {
    using std::numbers::pi;
    const double y = std::pow(s, -a_);
    double sum = 0.0;
    double yk = 1.0;
    for (int k = 1; k < 200; ++k) {
      yk *= y;
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      const double magnitude = std::exp(std::lgamma(k * a_ + 1.0) - std::lgamma(k + 1.0)) * yk;
      sum += sign * magnitude * std::sin(k * pi * a_);
      // sin(k pi a) can vanish, so stop on the term's magnitude bound instead.
      if (magnitude < 1e-17 * std::abs(sum) && k > 2) break;
    }
    return sum / (pi * s);
  }

  double zolotarev_standard(double s) const {
    using std::numbers::pi;
    const double w = std::pow(s, -a_ / (1.0 - a_));
    auto integrand = [&](double u) {
      if (u <= 0.0 || u >= pi) return 0.0;
      const double au = kanter(u);
      const double arg = au * w;
      return arg > 745.0 ? 0.0 : au * std::exp(-arg);
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, 0.0, pi, 12, 1e-11);
    return a_ / (1.0 - a_) * std::pow(s, -1.0 / (1.0 - a_)) * integral / pi;
  }

  double a_;
  double scale_;
};

inline double sample_one_sided_stable(const StableSpec& spec, Stream& rng) {
  return OneSidedStable(spec).sample(rng);
}

inline std::complex<double> stable_cf(const StableSpec& spec, double omega) {
  return OneSidedStable(spec).cf(omega);
}

}  // namespace htrm
