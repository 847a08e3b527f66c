#pragma once

// Eigenvalues, spectral variables, histograms, spacings, clusters and KS distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "averaged_semicircle.hpp"
#include "densities.hpp"
#include "ensembles.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace htrm {

struct SpectrumSample {
  std::vector<double> eigenvalues;  // ascending
  EnsembleSpec ensemble;
  std::uint64_t seed = 0;
};

namespace detail {
inline std::vector<double> hermitian_eigenvalues(const MatrixXc& h) {
  const Eigen::SelfAdjointEigenSolver<MatrixXc> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NonConvergence("eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}
}  // namespace detail

/// Ascending eigenvalues; block-diagonal inputs are solved per block and merged.
inline std::vector<double> eigenvalues(const ComplexMatrix& m) {
  std::vector<double> out;
  if (m.tag == StructureTag::block_diagonal) {
    for (const auto& b : m.blocks) {
      if (!is_hermitian(b)) throw NonHermitianInput("eigenvalues: block is not Hermitian");
      const auto ev = detail::hermitian_eigenvalues(b);
      out.insert(out.end(), ev.begin(), ev.end());
    }
  } else {
    if (!is_hermitian(m.entries)) throw NonHermitianInput("eigenvalues: matrix is not Hermitian");
    out = detail::hermitian_eigenvalues(m.entries);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- spectral variables -------------------------------------------------

/// N^M lambda for the inverse Ginibre families, lambda / sqrt(N) for GUE-type ensembles.
inline double macroscopic_scale(const EnsembleSpec& e) {
  switch (e.kind) {
    case EnsembleKind::inverse_ginibre_sum:
    case EnsembleKind::inverse_ginibre_direct_sum: return std::pow(static_cast<double>(e.n), e.m);
    case EnsembleKind::gue: return 1.0 / (e.sigma * std::sqrt(static_cast<double>(e.n)));
    case EnsembleKind::stable_gue: return 1.0 / std::sqrt(static_cast<double>(e.n));
  }
  return 1.0;
}

inline std::vector<double> macroscopic_transform(const SpectrumSample& s) {
  const double k = macroscopic_scale(s.ensemble);
  std::vector<double> out(s.eigenvalues.size());
  std::transform(s.eigenvalues.begin(), s.eigenvalues.end(), out.begin(), [&](double l) { return k * l; });
  return out;
}

/// Width constant of the soft edge: near x = 1/4 the inverse Marchenko-Pastur
/// density is (16/pi) sqrt(x - 1/4), and matching it to the Airy asymptote
/// sqrt(-s)/pi under s = c N^{2/3} (1 - 4x) forces c^{3/2} = 2.
inline double soft_edge_constant() { return std::cbrt(4.0); }

/// c N^{2/3} (1 - 4 N lambda); maps the soft edge 1/(4N) to 0 and reverses order.
inline double soft_edge_variable(double lambda, int n) {
  const double nn = static_cast<double>(n);
  return soft_edge_constant() * std::pow(nn, 2.0 / 3.0) * (1.0 - 4.0 * nn * lambda);
}

inline std::vector<double> soft_edge_transform(const SpectrumSample& s) {
  std::vector<double> out(s.eigenvalues.size());
  std::transform(s.eigenvalues.begin(), s.eigenvalues.end(), out.begin(),
                 [&](double l) { return soft_edge_variable(l, s.ensemble.n); });
  return out;
}

/// z = (N^{1/(M+1)} / c_M) lambda^{-1/(M+1)}; the largest eigenvalues map to the smallest z.
inline double tail_variable(double lambda, int n, int m) {
  const double p = 1.0 / (m + 1.0);
  return std::pow(static_cast<double>(n), p) / unfolding_constant(m) * std::pow(lambda, -p);
}

inline std::vector<double> tail_transform(const SpectrumSample& s, int m) {
  std::vector<double> out(s.eigenvalues.size());
  std::transform(s.eigenvalues.begin(), s.eigenvalues.end(), out.begin(),
                 [&](double l) { return tail_variable(l, s.ensemble.n, m); });
  return out;
}

/// mu(lambda / sqrt(N)) for stable-GUE spectra.
inline std::vector<double> unfold(const SpectrumSample& s, double alpha) {
  const auto table = averaged_semicircle_table(alpha);
  const double k = 1.0 / std::sqrt(static_cast<double>(s.ensemble.n));
  std::vector<double> out(s.eigenvalues.size());
  std::transform(s.eigenvalues.begin(), s.eigenvalues.end(), out.begin(), [&](double l) { return table->mu(k * l); });
  return out;
}

// ---- histograms ---------------------------------------------------------

enum class VariableTag { macroscopic, soft_edge, inverted_tail, unfolded };

inline const char* to_string(VariableTag t) {
  switch (t) {
    case VariableTag::macroscopic: return "macroscopic";
    case VariableTag::soft_edge: return "soft_edge";
    case VariableTag::inverted_tail: return "inverted_tail";
    case VariableTag::unfolded: return "unfolded";
  }
  return "?";
}

/// Fixed-width histogram on [lo, lo + bins * width). total_weight is the
/// normalizing count (number of draws for per-eigenvalue curves, number of
/// values for probability curves) and is set by the caller.
struct DensityEstimate {
  VariableTag tag = VariableTag::macroscopic;
  double lo = 0.0;
  double width = 0.1;
  std::vector<std::uint64_t> counts;
  std::uint64_t below = 0;
  std::uint64_t above = 0;
  double total_weight = 0.0;

  DensityEstimate() = default;
  DensityEstimate(VariableTag t, double lo_, double hi, double width_) : tag(t), lo(lo_), width(width_) {
    if (!(width_ > 0.0) || !(hi > lo_)) throw InvalidConfig("histogram: need width > 0 and hi > lo");
    counts.assign(static_cast<std::size_t>(std::llround(std::ceil((hi - lo_) / width_ - 1e-9))), 0);
  }

  std::size_t bins() const { return counts.size(); }
  double left(std::size_t i) const { return lo + width * static_cast<double>(i); }
  double center(std::size_t i) const { return left(i) + 0.5 * width; }

  void add(double x) {
    if (!(x >= lo)) {
      ++below;
      return;
    }
    const auto i = static_cast<std::size_t>(std::floor((x - lo) / width));
    if (i >= counts.size()) {
      ++above;
      return;
    }
    ++counts[i];
  }

  double height(std::size_t i) const { return static_cast<double>(counts[i]) / (total_weight * width); }

  /// Counts are integers, so merging is associative and commutative.
  void merge(const DensityEstimate& o) {
    if (o.counts.size() != counts.size() || o.lo != lo || o.width != width) {
      throw std::invalid_argument("histogram merge: incompatible binning");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    below += o.below;
    above += o.above;
    total_weight += o.total_weight;
  }
};

/// Bin average of a curve (Gauss-Kronrod over the bin), the fair comparison for a histogram height.
inline double bin_average(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 6, 1e-9) / (b - a);
}

struct BinComparison {
  double max_rel_dev = 0.0;
  std::size_t bins_used = 0;
  std::size_t worst_bin = 0;
};

/// Max |height / expected - 1| over bins whose expected count reaches min_expected,
/// skipping bins that start left of `from`.
inline BinComparison compare_bins(const DensityEstimate& h, const std::function<double(double)>& f,
                                  double min_expected, double from = -std::numeric_limits<double>::infinity()) {
  BinComparison out;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.left(i) < from) continue;
    const double ref = bin_average(f, h.left(i), h.left(i) + h.width);
    const double expected = ref * h.width * h.total_weight;
    if (expected < min_expected) continue;
    const double dev = std::abs(h.height(i) / ref - 1.0);
    ++out.bins_used;
    if (dev > out.max_rel_dev) {
      out.max_rel_dev = dev;
      out.worst_bin = i;
    }
  }
  return out;
}

// ---- spacings and clusters ---------------------------------------------

struct SpacingSeries {
  int k = 1;
  std::vector<double> values;  // divided by their mean
  double raw_mean = 0.0;
};

inline void normalize_by_mean(SpacingSeries& s) {
  if (s.values.empty()) return;
  const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / static_cast<double>(s.values.size());
  s.raw_mean = mean;
  for (double& v : s.values) v /= mean;
}

/// Spacing between the k-th and (k+1)-st value counted from the small end of
/// each (ascending) spectrum, or from the large end if from_top. Per-k mean normalization.
inline SpacingSeries spacing_distribution(const std::vector<std::vector<double>>& spectra, int k,
                                          bool from_top = false) {
  if (k < 1) throw std::invalid_argument("spacing_distribution: k >= 1");
  SpacingSeries out;
  out.k = k;
  out.values.reserve(spectra.size());
  for (const auto& s : spectra) {
    const auto n = static_cast<int>(s.size());
    if (n < k + 1) continue;
    const double gap = from_top ? s[n - k] - s[n - k - 1] : s[k] - s[k - 1];
    out.values.push_back(std::abs(gap));
  }
  normalize_by_mean(out);
  return out;
}

/// Rank-run clusters: cluster j holds ranks (j-1)L+1 .. jL of the values
/// ordered from the tail end (the first entry of tail_first).
inline std::vector<std::vector<double>> cluster_group(std::span<const double> tail_first, int l) {
  if (l < 1) throw std::invalid_argument("cluster_group: L >= 1");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(l) <= tail_first.size(); i += static_cast<std::size_t>(l)) {
    out.emplace_back(tail_first.begin() + static_cast<std::ptrdiff_t>(i),
                     tail_first.begin() + static_cast<std::ptrdiff_t>(i + l));
  }
  return out;
}

// ---- Kolmogorov-Smirnov -------------------------------------------------

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

/// sup |F_emp - F| for a continuous reference cdf.
inline double ks_against_cdf(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("ks_against_cdf: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

/// Cdf of a density on a finite window [lo, hi], tabulated by quadrature and
/// interpolated with the density as slope. Normalized to 1 on the window when
/// conditional is set.
class CdfTable {
 public:
  CdfTable(const std::function<double(double)>& pdf, double lo, double hi, int nodes = 2000, bool conditional = false)
      : lo_(lo), hi_(hi) {
    if (!(hi > lo) || nodes < 2) throw std::invalid_argument("CdfTable: bad window");
    std::vector<double> x(static_cast<std::size_t>(nodes) + 1), y(x.size()), dy(x.size());
    for (int i = 0; i <= nodes; ++i) x[i] = lo + (hi - lo) * i / nodes;
    y[0] = 0.0;
    for (int i = 0; i <= nodes; ++i) {
      dy[i] = pdf(x[i]);
      if (i > 0) y[i] = y[i - 1] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(pdf, x[i - 1], x[i], 5, 1e-10);
    }
    mass_ = y.back();
    if (conditional) {
      for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] /= mass_;
        dy[i] /= mass_;
      }
    }
    top_ = y.back();
    interp_ = std::make_shared<boost::math::interpolators::cubic_hermite<std::vector<double>>>(std::move(x), std::move(y),
                                                                                               std::move(dy));
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return top_;
    return (*interp_)(x);
  }

  double mass() const { return mass_; }

 private:
  double lo_, hi_, mass_ = 0.0, top_ = 0.0;
  std::shared_ptr<boost::math::interpolators::cubic_hermite<std::vector<double>>> interp_;
};

/// KS distance against an analytic density, restricted to [lo, hi]. Values
/// outside the window are dropped and both cdfs are conditioned on it.
inline double ks_against_density(const std::vector<double>& values, const AnalyticDensity& d, double lo, double hi) {
  const double a = std::max(lo, d.lo);
  const double b = std::min(hi, d.hi);
  std::vector<double> inside;
  inside.reserve(values.size());
  for (double v : values) {
    if (v >= a && v <= b) inside.push_back(v);
  }
  if (d.cdf) {
    const double fa = d.cdf(a);
    const double mass = d.cdf(b) - fa;
    return ks_against_cdf(std::move(inside), [&](double x) { return (d.cdf(x) - fa) / mass; });
  }
  const CdfTable table([&](double x) { return d(x); }, a, b, 2000, true);
  return ks_against_cdf(std::move(inside), table);
}

/// Whole-support version for densities with a finite support.
inline double ks_against_density(const std::vector<double>& values, const AnalyticDensity& d) {
  if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) {
    throw std::invalid_argument("ks_against_density: pass a window for unbounded supports");
  }
  return ks_against_density(values, d, d.lo, d.hi);
}

// ---- extremes -----------------------------------------------------------

/// Means of the largest and smallest unfolded eigenvalue over draws.
inline std::pair<double, double> mean_extreme_position(const std::vector<std::vector<double>>& unfolded_spectra) {
  if (unfolded_spectra.empty()) throw std::invalid_argument("mean_extreme_position: no spectra");
  double hi = 0.0;
  double lo = 0.0;
  for (const auto& s : unfolded_spectra) {
    hi += *std::max_element(s.begin(), s.end());
    lo += *std::min_element(s.begin(), s.end());
  }
  const double n = static_cast<double>(unfolded_spectra.size());
  return {hi / n, lo / n};
}

}  // namespace htrm
