#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "htrm/ensembles.hpp"
#include "htrm/spectral_stats.hpp"
#include "htrm/stable.hpp"

using namespace htrm;
using std::numbers::pi;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Stream a = make_stream(20211, "family", 7);
  Stream b = make_stream(20211, "family", 7);
  EXPECT_EQ(a(), b());
  std::set<std::uint64_t> firsts;
  for (std::uint64_t t = 0; t < 100; ++t) firsts.insert(make_stream(20211, "family", t)());
  firsts.insert(make_stream(20211, "other", 0)());
  firsts.insert(make_stream(20212, "family", 0)());
  EXPECT_EQ(firsts.size(), 102u);
}

TEST(Rng, DerivationIsDocumentedComposition) {
  const std::uint64_t tag = fnv1a64("inverse-ginibre-sum");
  EXPECT_EQ(derive_seed(5, tag, 3), splitmix64(splitmix64(5 ^ tag) + 3));
  // FNV-1a reference value for the empty string
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Ensembles, GinibreEntryVariance) {
  Stream rng = make_stream(1, "test", 0);
  const auto g = sample_ginibre(300, rng).entries;
  const double mean_sq = g.cwiseAbs2().mean();
  EXPECT_NEAR(mean_sq, 1.0, 0.02);
  EXPECT_NEAR(std::abs(g.mean()), 0.0, 0.01);
  EXPECT_THROW(sample_ginibre(0, rng), std::invalid_argument);
}

TEST(Ensembles, InverseGinibreIsInverse) {
  Stream rng = make_stream(1, "test", 1);
  Stream copy = rng;
  const auto x = sample_inverse_ginibre(40, rng).entries;
  const auto g = sample_ginibre(40, copy).entries;
  EXPECT_LT((g * x - MatrixXc::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ensembles, SumOfGramsWithScale) {
  EnsembleSpec spec;
  spec.n = 12;
  spec.m = 2;
  spec.l = 3;
  Stream rng = make_stream(3, "test", 0);
  Stream replay = rng;
  const auto y = sample_sum_Y(spec, rng);
  MatrixXc expect = MatrixXc::Zero(12, 12);
  for (int l = 0; l < 3; ++l) {
    const MatrixXc x1 = sample_ginibre(12, replay).entries.inverse();
    const MatrixXc x2 = sample_ginibre(12, replay).entries.inverse();
    const MatrixXc x = x2 * x1;
    expect += x.adjoint() * x;
  }
  expect /= std::pow(3.0, 3.0);
  EXPECT_LT((y.entries - expect).cwiseAbs().maxCoeff(), 1e-8 * expect.cwiseAbs().maxCoeff());
  EXPECT_TRUE(is_hermitian(y.entries, 0.0));
  EXPECT_EQ(y.tag, StructureTag::hermitian_positive_definite);
}

TEST(Ensembles, DirectSumL1EqualsSumDrawForDraw) {
  EnsembleSpec sum;
  sum.n = 30;
  sum.m = 2;
  EnsembleSpec direct = sum;
  direct.kind = EnsembleKind::inverse_ginibre_direct_sum;
  for (std::uint64_t t = 0; t < 5; ++t) {
    Stream a = make_stream(9, "same", t);
    Stream b = make_stream(9, "same", t);
    EXPECT_EQ(eigenvalues(sample(sum, a)), eigenvalues(sample(direct, b)));
  }
}

TEST(Ensembles, DirectSumBlocksAreTheSumTerms) {
  EnsembleSpec spec;
  spec.n = 10;
  spec.l = 3;
  spec.kind = EnsembleKind::inverse_ginibre_direct_sum;
  Stream a = make_stream(4, "x", 0);
  const auto d = sample(spec, a);
  ASSERT_EQ(d.blocks.size(), 3u);
  EXPECT_EQ(d.n(), 30);
  // eigenvalues of the block-diagonal matrix are the union of the block spectra
  const auto ev = eigenvalues(d);
  ComplexMatrix dense{d.dense(), StructureTag::hermitian, {}};
  const auto ev_dense = eigenvalues(dense);
  ASSERT_EQ(ev.size(), ev_dense.size());
  for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], ev_dense[i], 1e-9 * std::abs(ev_dense.back()));
  // sum of the same blocks, rescaled
  spec.kind = EnsembleKind::inverse_ginibre_sum;
  Stream b = make_stream(4, "x", 0);
  const auto y = sample(spec, b);
  MatrixXc s = MatrixXc::Zero(10, 10);
  for (const auto& blk : d.blocks) s += blk;
  s /= 9.0;
  EXPECT_LT((y.entries - s).cwiseAbs().maxCoeff(), 1e-10 * s.cwiseAbs().maxCoeff());
}

TEST(Ensembles, GueMoments) {
  Stream rng = make_stream(2, "gue", 0);
  const int n = 200;
  const double sigma = 1.5;
  const auto h = sample_gue(n, sigma, rng);
  EXPECT_TRUE(is_hermitian(h.entries, 0.0));
  double diag = 0.0;
  double off = 0.0;
  for (int i = 0; i < n; ++i) {
    diag += std::norm(h.entries(i, i));
    for (int j = i + 1; j < n; ++j) off += std::norm(h.entries(i, j));
  }
  EXPECT_NEAR(diag / n, sigma * sigma, 0.3);
  EXPECT_NEAR(off / (n * (n - 1) / 2.0), sigma * sigma, 0.03);
}

TEST(Ensembles, GueSemicircleRadius) {
  Stream rng = make_stream(2, "gue", 1);
  const int n = 400;
  const auto ev = eigenvalues(sample_gue(n, 1.0, rng));
  EXPECT_NEAR(ev.back() / std::sqrt(n), 2.0, 0.05);
  EXPECT_NEAR(ev.front() / std::sqrt(n), -2.0, 0.05);
}

TEST(Ensembles, SpecValidation) {
  EnsembleSpec s;
  s.n = 0;
  EXPECT_THROW(s.validate(), InvalidConfig);
  s = {};
  s.m = 0;
  EXPECT_THROW(s.validate(), InvalidConfig);
  s = {};
  s.l = 0;
  EXPECT_THROW(s.validate(), InvalidConfig);
  s = {};
  s.kind = EnsembleKind::stable_gue;
  s.alpha = 2.0;
  EXPECT_THROW(s.validate(), InvalidConfig);
  EXPECT_EQ(parse_ensemble_kind("inverse_ginibre_direct_sum"), EnsembleKind::inverse_ginibre_direct_sum);
  EXPECT_THROW(parse_ensemble_kind("nope"), InvalidConfig);
}

TEST(Ensembles, EigenvaluesRejectNonHermitian) {
  ComplexMatrix m;
  m.entries = MatrixXc::Zero(3, 3);
  m.entries(0, 1) = 1.0;
  EXPECT_THROW(eigenvalues(m), NonHermitianInput);
}

// ---- one-sided stable law -----------------------------------------------------

TEST(Stable, HalfExponentIsLevy) {
  // Laplace transform exp(-sqrt(2 t)): Levy law with unit scale
  const OneSidedStable law({0.5});
  for (double x : {0.05, 0.3, 1.0, 5.0, 80.0, 5000.0}) {
    const double levy = std::exp(-1.0 / (2.0 * x)) / std::sqrt(2.0 * pi * x * x * x);
    EXPECT_NEAR(law.pdf(x) / levy, 1.0, 1e-7) << "x=" << x;
  }
  EXPECT_NEAR(law.laplace(2.0), std::exp(-2.0), 1e-14);
}

TEST(Stable, DensityNormalizedAndMatchesLaplace) {
  for (double a : {0.25, 0.5, 0.75, 0.9}) {
    const OneSidedStable law({a});
    // [0, X] directly; beyond X the substitution x = X w^(-1/a) turns the x^(-1-a) tail into a smooth integrand
    const double big = law.series_threshold();
    auto mass = [&](double t) {
      using boost::math::quadrature::gauss_kronrod;
      const double body = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return x > 0.0 ? std::exp(-t * x) * law.pdf(x) : 0.0; }, 0.0, big, 20, 1e-12);
      const double tail = gauss_kronrod<double, 61>::integrate(
          [&](double w) {
            if (w <= 0.0) return 0.0;
            const double x = big * std::pow(w, -1.0 / a);
            return std::exp(-t * x) * law.pdf(x) * x / (a * w);
          },
          0.0, 1.0, 20, 1e-12);
      return body + tail;
    };
    EXPECT_NEAR(mass(0.0), 1.0, 2e-4) << "a=" << a;
    EXPECT_NEAR(mass(1.0), law.laplace(1.0), 2e-4) << "a=" << a;
  }
}

TEST(Stable, SamplerMatchesLaplaceTransform) {
  for (double a : {0.25, 0.5, 0.75, 0.9}) {
    const OneSidedStable law({a});
    Stream rng = make_stream(11, "stable", 0);
    const int n = 200000;
    double e1 = 0.0;
    double e2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = law.sample(rng);
      ASSERT_GT(x, 0.0);
      e1 += std::exp(-x);
      e2 += std::exp(-0.2 * x);
    }
    EXPECT_NEAR(e1 / n, law.laplace(1.0), 4e-3) << "a=" << a;
    EXPECT_NEAR(e2 / n, law.laplace(0.2), 4e-3) << "a=" << a;
  }
}

TEST(Stable, CharacteristicFunctionContinuation) {
  const OneSidedStable law({0.6});
  // cf(i t) is the Laplace transform at t
  EXPECT_NEAR(std::abs(law.cf(cplx(0.0, 1.3)) - law.laplace(1.3)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(law.cf(0.8) - law.cf(cplx(0.8, 0.0))), 0.0, 1e-13);
  EXPECT_THROW(OneSidedStable({1.0}), std::invalid_argument);
}

TEST(Stable, TailConstant) {
  const OneSidedStable law({0.4});
  const double x = 1e8;
  EXPECT_NEAR(law.pdf(x) / (law.tail_constant() * std::pow(x, -1.4)), 1.0, 1e-3);
}

TEST(Stable, StableGueScalesByRootOfVariance) {
  Stream a = make_stream(5, "sg", 0);
  Stream b = a;
  const auto h = sample_stable_gue(20, 1.2, a);
  const double x = OneSidedStable({0.6}).sample(b);
  const auto g = sample_gue(20, 1.0, b);
  EXPECT_LT((h.entries - std::sqrt(x) * g.entries).cwiseAbs().maxCoeff(), 1e-12 * std::sqrt(x));
}
