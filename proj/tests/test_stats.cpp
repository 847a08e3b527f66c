#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "htrm/averaged_semicircle.hpp"
#include "htrm/parallel.hpp"
#include "htrm/spectral_stats.hpp"

using namespace htrm;
using std::numbers::pi;

TEST(Histogram, BinningAndOverflow) {
  DensityEstimate h(VariableTag::macroscopic, 0.0, 1.0, 0.25);
  ASSERT_EQ(h.bins(), 4u);
  for (double x : {-0.1, 0.0, 0.24, 0.25, 0.99, 1.0, 7.0}) h.add(x);
  EXPECT_EQ(h.below, 1u);
  EXPECT_EQ(h.above, 2u);
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{2, 1, 0, 1}));
  h.total_weight = 4.0;
  EXPECT_DOUBLE_EQ(h.height(0), 2.0);
  EXPECT_DOUBLE_EQ(h.left(3), 0.75);
  EXPECT_THROW(DensityEstimate(VariableTag::macroscopic, 1.0, 0.0, 0.1), InvalidConfig);
}

TEST(Histogram, MergeIsOrderIndependent) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> xs(3000);
  for (double& x : xs) x = g(rng);
  DensityEstimate whole(VariableTag::macroscopic, -3.0, 3.0, 0.1);
  for (double x : xs) whole.add(x);
  whole.total_weight = 3000;
  std::vector<DensityEstimate> parts(3, DensityEstimate(VariableTag::macroscopic, -3.0, 3.0, 0.1));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    parts[i % 3].add(xs[i]);
    parts[i % 3].total_weight += 1.0;
  }
  DensityEstimate ab = parts[0];
  ab.merge(parts[1]);
  ab.merge(parts[2]);
  DensityEstimate cb = parts[2];
  cb.merge(parts[0]);
  cb.merge(parts[1]);
  EXPECT_EQ(ab.counts, whole.counts);
  EXPECT_EQ(cb.counts, whole.counts);
  EXPECT_EQ(ab.below + ab.above, whole.below + whole.above);
  EXPECT_EQ(ab.total_weight, whole.total_weight);
  EXPECT_THROW(ab.merge(DensityEstimate(VariableTag::macroscopic, -3.0, 3.0, 0.2)), std::invalid_argument);
}

TEST(Histogram, CompareBinsSkipsLowCountsAndLeftOfCut) {
  DensityEstimate h(VariableTag::macroscopic, 0.0, 2.0, 0.5);
  h.counts = {100, 110, 5, 0};
  h.total_weight = 400.0;  // flat density 0.5 expects 100 per bin
  const auto flat = [](double) { return 0.5; };
  auto c = compare_bins(h, flat, 50.0);
  EXPECT_EQ(c.bins_used, 4u);
  EXPECT_NEAR(c.max_rel_dev, 1.0, 1e-12);
  c = compare_bins(h, flat, 50.0, 0.4);
  EXPECT_EQ(c.bins_used, 3u);
  c = compare_bins(h, flat, 150.0);
  EXPECT_EQ(c.bins_used, 0u);
  EXPECT_NEAR(bin_average([](double x) { return x * x; }, 0.0, 3.0), 3.0, 1e-12);
}

TEST(KolmogorovSmirnov, TwoSampleExtremes) {
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {4, 5}), 1.0);
  // F_a(2) = 1/2 against F_b(2) = 0
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3, 4}, {3, 4, 5, 6}), 0.5);
  EXPECT_THROW(ks_two_sample({}, {1.0}), std::invalid_argument);
}

TEST(KolmogorovSmirnov, AgainstCdf) {
  // a single point at 0.5 under U(0,1): D = 1/2
  EXPECT_DOUBLE_EQ(ks_against_cdf({0.5}, [](double x) { return x; }), 0.5);
  EXPECT_NEAR(ks_against_cdf({0.25, 0.75}, [](double x) { return x; }), 0.25, 1e-15);
  // a large uniform sample stays within the 1.63/sqrt(n) envelope
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  std::vector<double> xs(20000);
  for (double& x : xs) x = u(rng);
  EXPECT_LT(ks_against_cdf(xs, [](double x) { return x; }), 1.63 / std::sqrt(20000.0));
}

TEST(KolmogorovSmirnov, AgainstDensityOnWindow) {
  // exponential sample, restricted to [0.5, 3], against the conditioned law
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> e;
  std::vector<double> xs(50000);
  for (double& x : xs) x = e(rng);
  AnalyticDensity with_cdf{"exp", poisson_spacing, 0.0, 1e9, Normalization::probability, poisson_spacing_cdf};
  AnalyticDensity without{"exp", poisson_spacing, 0.0, 1e9, Normalization::probability, nullptr};
  const double a = ks_against_density(xs, with_cdf, 0.5, 3.0);
  const double b = ks_against_density(xs, without, 0.5, 3.0);
  EXPECT_NEAR(a, b, 1e-6);
  EXPECT_LT(a, 0.012);
  AnalyticDensity unbounded{"exp", poisson_spacing, 0.0, std::numeric_limits<double>::infinity(),
                            Normalization::probability, nullptr};
  EXPECT_THROW(ks_against_density(xs, unbounded), std::invalid_argument);
}

TEST(CdfTable, MatchesClosedForm) {
  const CdfTable t(wigner_surmise, 0.0, 4.0);
  for (double s : {0.2, 1.0, 2.2}) EXPECT_NEAR(t(s), wigner_surmise_cdf(s), 1e-10);
  EXPECT_EQ(t(-1.0), 0.0);
  const CdfTable c(wigner_surmise, 0.0, 1.0, 500, true);
  EXPECT_NEAR(c(1.0), 1.0, 1e-12);
}

TEST(Spacings, PerIndexAndMeanNormalized) {
  const std::vector<std::vector<double>> spectra = {{0.0, 1.0, 3.0}, {0.0, 3.0, 4.0}};
  const auto s1 = spacing_distribution(spectra, 1);
  EXPECT_NEAR(s1.raw_mean, 2.0, 1e-15);
  EXPECT_EQ(s1.values, (std::vector<double>{0.5, 1.5}));
  const auto top = spacing_distribution(spectra, 1, true);
  EXPECT_EQ(top.values, (std::vector<double>{4.0 / 3.0, 2.0 / 3.0}));
  EXPECT_TRUE(spacing_distribution(spectra, 3).values.empty());
  EXPECT_THROW(spacing_distribution(spectra, 0), std::invalid_argument);
}

TEST(Spacings, ClusterGroupsByRank) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7};
  const auto c = cluster_group(v, 3);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1], (std::vector<double>{4, 5, 6}));
  EXPECT_EQ(cluster_group(v, 1).size(), 7u);
  EXPECT_THROW(cluster_group(v, 0), std::invalid_argument);
}

TEST(Spacings, MeanExtremePositions) {
  const auto [hi, lo] = mean_extreme_position({{-0.4, 0.1, 0.3}, {-0.2, 0.0, 0.1}});
  EXPECT_NEAR(hi, 0.2, 1e-15);
  EXPECT_NEAR(lo, -0.3, 1e-15);
}

TEST(SpectralVariables, TailVariableInvertsTheTailScale) {
  // z = (N / lambda)^(1/(M+1)) / c_M
  for (int m : {1, 2}) {
    const double z = tail_variable(8.0, 100, m);
    EXPECT_NEAR(z, std::pow(100.0 / 8.0, 1.0 / (m + 1.0)) / unfolding_constant(m), 1e-12);
  }
  EnsembleSpec e;
  e.n = 50;
  e.m = 2;
  EXPECT_DOUBLE_EQ(macroscopic_scale(e), 2500.0);
  const SpectrumSample s{{1e-3, 2e-3}, e, 0};
  EXPECT_DOUBLE_EQ(macroscopic_transform(s)[1], 5.0);
  EXPECT_EQ(tail_transform(s, 2).size(), 2u);
}

// ---- worker pool -----------------------------------------------------------------

TEST(Parallel, SameResultForAnyWorkerCount) {
  auto run = [](int workers) {
    std::vector<double> out(257);
    parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = std::sin(static_cast<double>(i)); });
    return out;
  };
  const auto one = run(1);
  EXPECT_EQ(run(4), one);
  EXPECT_EQ(run(8), one);
  EXPECT_EQ(run(0), one);
  EXPECT_GE(resolve_workers(0), 1);
  EXPECT_EQ(resolve_workers(3), 3);
}

TEST(Parallel, PropagatesExceptions) {
  std::atomic<int> done{0};
  EXPECT_THROW(parallel_for(100, 4,
                            [&](std::size_t i) {
                              if (i == 37) throw NonConvergence("boom");
                              ++done;
                            }),
               NonConvergence);
  EXPECT_THROW(parallel_for(10, 1, [](std::size_t) { throw std::runtime_error("x"); }), std::runtime_error);
}

// ---- averaged semicircle and unfolding ---------------------------------------------

TEST(AveragedSemicircle, OriginValueFromStableMoment) {
  // rho(0) = E[1 / (pi sqrt(x))] with E[x^-s] = Gamma(s/a) / (a Gamma(s) k^(s/a)), k = 1/cos(pi a/2)
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double a = alpha / 2.0;
    const double k = 1.0 / std::cos(pi * a / 2.0);
    const double moment = std::tgamma(0.5 / a) / (a * std::tgamma(0.5) * std::pow(k, 0.5 / a));
    EXPECT_NEAR(averaged_semicircle(0.0, alpha), moment / pi, 1e-6) << alpha;
  }
}

TEST(AveragedSemicircle, MassSymmetryAndUnfoldingMap) {
  const AveragedSemicircle t(1.0);
  EXPECT_NEAR(t.total_mass(), 1.0, 1e-6);
  EXPECT_NEAR(t.rho(1.3), t.rho(-1.3), 1e-14);
  EXPECT_NEAR(t.mu(0.0), 0.0, 1e-14);
  EXPECT_NEAR(t.mu(-2.0), -t.mu(2.0), 1e-14);
  // mu is the integral of rho
  const double q = boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double x) { return t.rho(x); }, 0.0,
                                                                                 2.0, 10, 1e-10);
  EXPECT_NEAR(t.mu(2.0), q, 1e-6);
  EXPECT_NEAR(t.mu(1e6), 0.5, 1e-4);
  for (double m : {-0.45, -0.1, 0.2, 0.49}) EXPECT_NEAR(t.mu(t.mu_inverse(m)), m, 1e-10);
  EXPECT_THROW(t.mu_inverse(0.5), std::domain_error);
}

TEST(AveragedSemicircle, DirectMixtureIntegral) {
  // rho(l) = int p(x) sqrt(4x - l^2) / (2 pi x) dx over x > l^2 / 4
  const double alpha = 1.5;
  const OneSidedStable law({alpha / 2.0});
  const double l = 1.7;
  const double x0 = l * l / 4.0;
  auto f = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double x = x0 + u / (1.0 - u);
    return law.pdf(x) * std::sqrt(4.0 * x - l * l) / (2.0 * pi * x) / ((1.0 - u) * (1.0 - u));
  };
  const double direct = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-11);
  EXPECT_NEAR(averaged_semicircle(l, alpha), direct, 2e-6);
}

TEST(AveragedSemicircle, TailMatchesStableExponent) {
  // rho(l) ~ C l^(-1 - alpha): the log-slope approaches -1 - alpha
  const AveragedSemicircle t(1.0);
  const double a = 300.0;
  const double slope = std::log(t.rho(2.0 * a) / t.rho(a)) / std::log(2.0);
  EXPECT_NEAR(slope, -2.0, 0.02);
}

TEST(Unfolding, StableGueSpectraMapIntoOpenInterval) {
  EnsembleSpec e;
  e.kind = EnsembleKind::stable_gue;
  e.n = 60;
  e.alpha = 1.0;
  Stream rng = make_stream(1, "unfold", 0);
  const auto ev = eigenvalues(sample(e, rng));
  const auto mu = unfold(SpectrumSample{ev, e, 0}, 1.0);
  EXPECT_TRUE(std::is_sorted(mu.begin(), mu.end()));
  EXPECT_GT(mu.front(), -0.5);
  EXPECT_LT(mu.back(), 0.5);
}
