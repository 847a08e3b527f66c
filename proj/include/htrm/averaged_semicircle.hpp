#pragma once

// Macroscopic density of sqrt(x) H with H a GUE matrix on the semicircle
// scale and x one-sided stable with exponent alpha/2:
//
//   rho(lambda) = int_{lambda^2/4}^inf sqrt(4x - lambda^2) / (2 pi x) p(x) dx,
//   mu(lambda)  = int_0^lambda rho,   mu: R -> (-1/2, 1/2).
//
// p is tabulated once per alpha on a log grid (Zolotarev integral), rho is
// integrated against it with x = lambda^2 cosh^2(t) / 4, which removes the
// square-root edge. mu is accumulated on a sinh-spaced lambda grid and
// interpolated by cubic Hermite with rho as the slope. Beyond the grid both
// rho and mu come from integrating the large-x series of p term by term:
//
//   int_{l^2/4}^inf sqrt(4x - l^2)/(2 pi x) x^(-b) dx = |l| (l^2/4)^(-b) B(b - 1/2, 3/2) / (2 pi).
//
// Tables can be persisted in a directory; files are keyed by alpha and the
// build is deterministic, so concurrent writers produce identical content.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/makima.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "errors.hpp"
#include "stable.hpp"

namespace htrm {

class AveragedSemicircle {
 public:
  /// Without the unfolding table only rho() is usable until load() or build_unfolding_table().
  explicit AveragedSemicircle(double alpha, bool with_unfolding_table = true) : alpha_(alpha), law_({alpha / 2.0}) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("averaged semicircle needs 0 < alpha < 2");
    lambda_max_ = 2.0 * std::sqrt(law_.series_threshold());
    build_pdf_table();
    if (with_unfolding_table) build_unfolding_table();
  }

  double alpha() const { return alpha_; }
  const OneSidedStable& variance_law() const { return law_; }

  double rho(double lambda) const {
    const double l = std::abs(lambda);
    if (l >= lambda_max_) return rho_series(l);
    if (l == 0.0) return rho_zero();
    return rho_integral(l);
  }

  double mu(double lambda) const {
    const double l = std::abs(lambda);
    const double sign = lambda < 0.0 ? -1.0 : 1.0;
    if (l >= lambda_max_) return sign * (0.5 - upper_mass(l));
    return sign * (*mu_interp_)(l);
  }

  /// Inverse of mu on (-1/2, 1/2): bracketing bisection, then Newton.
  double mu_inverse(double m) const {
    if (!(m > -0.5 && m < 0.5)) throw std::domain_error("mu_inverse: argument outside (-1/2, 1/2)");
    if (m == 0.0) return 0.0;
    const double target = std::abs(m);
    double lo = 0.0;
    double hi = lambda_max_;
    while (mu(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NonConvergence("mu_inverse: bracketing failed");
    }
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mu(mid) < target ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 20; ++it) {
      const double slope = slope_at(x);
      if (!(slope > 0.0)) break;
      double next = x - (mu(x) - target) / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      (mu(next) < target ? lo : hi) = next;
      const bool done = std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x));
      x = next;
      if (done) break;
    }
    return m < 0.0 ? -x : x;
  }

  /// Mass in both tails beyond |lambda| = l, from the series (valid for l >= lambda_max()).
  double lambda_max() const { return lambda_max_; }

  /// Total mass, which should be 1; used as a self-check.
  double total_mass() const { return 2.0 * (mu_nodes_.back() + upper_mass(lambda_max_)); }

  void save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    const std::uint64_t n = lambda_nodes_.size();
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, alpha_);
    write_pod(out, n);
    for (const auto* v : {&lambda_nodes_, &rho_nodes_, &mu_nodes_}) {
      out.write(reinterpret_cast<const char*>(v->data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
  }

  /// Loads a table written by save(); returns false if absent or built for another alpha.
  bool load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return false;
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    double alpha = 0.0;
    std::uint64_t n = 0;
    read_pod(in, alpha);
    read_pod(in, n);
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || alpha != alpha_ || n < 2 || n > 1000000) return false;
    std::vector<double> l(n), r(n), m(n);
    for (auto* v : {&l, &r, &m}) in.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) return false;
    lambda_nodes_ = std::move(l);
    rho_nodes_ = std::move(r);
    mu_nodes_ = std::move(m);
    lambda_max_ = lambda_nodes_.back();
    make_interpolant();
    return true;
  }

  void build_unfolding_table() {
    const double step = 0.004;
    const int n = static_cast<int>(std::ceil(std::asinh(lambda_max_) / step));
    lambda_nodes_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) lambda_nodes_[i] = std::sinh(std::asinh(lambda_max_) * i / n);
    lambda_nodes_.back() = lambda_max_;
    rho_nodes_.resize(lambda_nodes_.size());
    mu_nodes_.resize(lambda_nodes_.size());
    for (std::size_t i = 0; i < lambda_nodes_.size(); ++i) rho_nodes_[i] = rho(lambda_nodes_[i]);
    mu_nodes_[0] = 0.0;
    for (std::size_t i = 1; i < lambda_nodes_.size(); ++i) {
      const double a = lambda_nodes_[i - 1];
      const double b = lambda_nodes_[i];
      mu_nodes_[i] = mu_nodes_[i - 1] +
                     boost::math::quadrature::gauss<double, 7>::integrate([&](double l) { return rho(l); }, a, b);
    }
    make_interpolant();
  }

 private:
  static constexpr char kMagic[8] = {'H', 'T', 'R', 'M', 'A', 'S', 'C', '1'};

  template <class T>
  static void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <class T>
  static void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
  }

  void build_pdf_table() {
    // log p on a uniform grid in log x, from where p is negligible up to the
    // start of the series region.
    const double t_hi = std::log(law_.series_threshold()) + 0.1;
    double t_lo = std::log(law_.scale());
    while (law_.pdf(std::exp(t_lo)) * std::exp(t_lo) > 1e-300 && t_lo > -700.0) t_lo -= 0.5;
    // Back off to where x p(x) is still representable in log form.
    while (!(law_.pdf(std::exp(t_lo)) > 0.0)) t_lo += 0.05;
    t_lo_ = t_lo;
    t_hi_ = t_hi;
    const double h = 0.005;
    const int n = static_cast<int>(std::ceil((t_hi - t_lo) / h));
    std::vector<double> t(static_cast<std::size_t>(n) + 1), lp(t.size());
    for (int i = 0; i <= n; ++i) {
      t[i] = t_lo + (t_hi - t_lo) * i / n;
      lp[i] = std::log(law_.pdf(std::exp(t[i])));
    }
    log_pdf_ = std::make_unique<boost::math::interpolators::makima<std::vector<double>>>(std::move(t), std::move(lp));
  }

  double pdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    const double t = std::log(x);
    if (t < t_lo_) return 0.0;
    if (t >= t_hi_ || law_.in_series_region(x)) return law_.pdf(x);
    return std::exp((*log_pdf_)(t));
  }

  double rho_zero() const {
    // (1/pi) E[x^{-1/2}], integrated in log x
    auto f = [&](double t) {
      if (t > 700.0) return 0.0;
      const double x = std::exp(t);
      return std::sqrt(x) * pdf(x);
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double body = gk::integrate(f, t_lo_, t_hi_, 8, 1e-10);
    const double tail = gk::integrate(f, t_hi_, std::numeric_limits<double>::infinity(), 8, 1e-10);
    return (body + tail) / std::numbers::pi;
  }

  double rho_integral(double l) const {
    // x = l^2 cosh^2(t) / 4
    auto f = [&](double t) {
      if (t > 300.0) return 0.0;
      const double c = std::cosh(t);
      const double s = std::sinh(t);
      return s * s / c * pdf(0.25 * l * l * c * c);
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double integral = gk::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 8, 1e-10);
    return l / std::numbers::pi * integral;
  }

  double rho_series(double l) const {
    const double a = law_.alpha_tilde();
    const double x0 = 0.25 * l * l;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double b = k * a + 1.0;
      const double term = law_.series_coefficient(k) * std::pow(x0, -b) * boost::math::beta(b - 0.5, 1.5);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum) && k > 4) break;
    }
    return l / (2.0 * std::numbers::pi) * sum;
  }

  double upper_mass(double l) const {
    // int_l^inf of rho_series, term by term
    const double a = law_.alpha_tilde();
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double b = k * a + 1.0;
      const double term = law_.series_coefficient(k) * boost::math::beta(b - 0.5, 1.5) *
                          std::pow(4.0, b) * std::pow(l, 2.0 - 2.0 * b) / (2.0 * b - 2.0);
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum) && k > 4) break;
    }
    return sum / (2.0 * std::numbers::pi);
  }

  double slope_at(double l) const {
    if (l >= lambda_max_) return rho_series(l);
    return mu_interp_->prime(l);
  }

  void make_interpolant() {
    mu_interp_ = std::make_unique<boost::math::interpolators::cubic_hermite<std::vector<double>>>(
        std::vector<double>(lambda_nodes_), std::vector<double>(mu_nodes_), std::vector<double>(rho_nodes_));
  }

  double alpha_;
  OneSidedStable law_;
  double t_lo_ = 0.0;
  double t_hi_ = 0.0;
  std::unique_ptr<boost::math::interpolators::makima<std::vector<double>>> log_pdf_;
  double lambda_max_ = 0.0;
  std::vector<double> lambda_nodes_;
  std::vector<double> rho_nodes_;
  std::vector<double> mu_nodes_;
  std::unique_ptr<boost::math::interpolators::cubic_hermite<std::vector<double>>> mu_interp_;
};

namespace detail {

struct SemicircleRegistry {
  std::mutex mutex;
  std::map<double, std::shared_ptr<const AveragedSemicircle>> tables;
  std::filesystem::path cache_dir;
};

inline SemicircleRegistry& semicircle_registry() {
  static SemicircleRegistry registry;
  return registry;
}

inline std::string alpha_key(double alpha) {
  std::uint64_t bits;
  std::memcpy(&bits, &alpha, sizeof(bits));
  std::ostringstream name;
  name << "averaged-semicircle-" << std::hex << bits << ".bin";
  return name.str();
}

}  // namespace detail

/// Directory for persisted unfolding tables; empty disables the disk cache.
inline void set_semicircle_cache_dir(const std::filesystem::path& dir) {
  auto& reg = detail::semicircle_registry();
  std::lock_guard lock(reg.mutex);
  reg.cache_dir = dir;
}

/// Shared, fully built table for this alpha (memory cache, then disk cache, then build).
inline std::shared_ptr<const AveragedSemicircle> averaged_semicircle_table(double alpha) {
  auto& reg = detail::semicircle_registry();
  std::lock_guard lock(reg.mutex);
  if (auto it = reg.tables.find(alpha); it != reg.tables.end()) return it->second;
  auto table = std::make_shared<AveragedSemicircle>(alpha, false);
  bool loaded = false;
  std::filesystem::path file;
  if (!reg.cache_dir.empty()) {
    file = reg.cache_dir / detail::alpha_key(alpha);
    loaded = table->load(file);
  }
  if (!loaded) {
    table->build_unfolding_table();
    if (!file.empty()) {
      std::filesystem::create_directories(reg.cache_dir);
      const auto tmp = file.string() + ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(table.get()));
      table->save(tmp);
      std::filesystem::rename(tmp, file);
    }
  }
  reg.tables.emplace(alpha, table);
  return table;
}

inline double averaged_semicircle(double lambda, double alpha) {
  return averaged_semicircle_table(alpha)->rho(lambda);
}

inline double unfolding_map(double lambda, double alpha) {
  return averaged_semicircle_table(alpha)->mu(lambda);
}

inline double unfolding_map_inverse(double mu, double alpha) {
  return averaged_semicircle_table(alpha)->mu_inverse(mu);
}

}  // namespace htrm
