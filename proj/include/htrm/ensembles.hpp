#pragma once

// Random matrix draws. All samplers consume the stream in a fixed order, so a
// (spec, stream) pair always produces the same matrix.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "stable.hpp"

namespace htrm {

enum class EnsembleKind { inverse_ginibre_sum, inverse_ginibre_direct_sum, gue, stable_gue };

inline const char* to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::inverse_ginibre_sum: return "inverse_ginibre_sum";
    case EnsembleKind::inverse_ginibre_direct_sum: return "inverse_ginibre_direct_sum";
    case EnsembleKind::gue: return "gue";
    case EnsembleKind::stable_gue: return "stable_gue";
  }
  return "?";
}

inline EnsembleKind parse_ensemble_kind(const std::string& s) {
  if (s == "inverse_ginibre_sum") return EnsembleKind::inverse_ginibre_sum;
  if (s == "inverse_ginibre_direct_sum") return EnsembleKind::inverse_ginibre_direct_sum;
  if (s == "gue") return EnsembleKind::gue;
  if (s == "stable_gue") return EnsembleKind::stable_gue;
  throw InvalidConfig("unknown ensemble kind '" + s + "'");
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::inverse_ginibre_sum;
  int n = 100;
  int m = 1;
  int l = 1;
  double alpha = 1.0;  // stable_gue only
  double sigma = 1.0;  // gue only

  void validate() const {
    if (n < 1) throw InvalidConfig("ensemble: n must be >= 1");
    if (m < 1) throw InvalidConfig("ensemble: M must be >= 1");
    if (l < 1) throw InvalidConfig("ensemble: L must be >= 1");
    if (kind == EnsembleKind::stable_gue && !(alpha > 0.0 && alpha < 2.0)) {
      throw InvalidConfig("ensemble: stable_gue needs 0 < alpha < 2");
    }
    if (kind == EnsembleKind::gue && !(sigma > 0.0)) throw InvalidConfig("ensemble: gue needs sigma > 0");
  }

  /// Stability exponent: 1/(M+1) for the inverse Ginibre families, alpha for stable_gue.
  double stability_exponent() const {
    switch (kind) {
      case EnsembleKind::inverse_ginibre_sum:
      case EnsembleKind::inverse_ginibre_direct_sum: return 1.0 / (m + 1.0);
      case EnsembleKind::stable_gue: return alpha;
      case EnsembleKind::gue: return 2.0;
    }
    return 0.0;
  }

  /// Eigenvalue count of one draw.
  int spectrum_size() const { return kind == EnsembleKind::inverse_ginibre_direct_sum ? n * l : n; }

  bool operator==(const EnsembleSpec&) const = default;
};

/// Threshold on the 1-norm condition estimate above which a Ginibre draw is resampled.
inline constexpr double kMaxCondition = 1e14;

/// Complex Gaussian with density exp(-|x|^2)/pi.
template <class Rng>
std::complex<double> complex_gaussian(Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

inline ComplexMatrix sample_ginibre(int n, Stream& rng) {
  if (n < 1) throw std::invalid_argument("sample_ginibre: n >= 1");
  ComplexMatrix out;
  out.entries.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out.entries(i, j) = complex_gaussian(rng);
  }
  return out;
}

/// G^-1 for a Ginibre G; near-singular draws are rejected and redrawn from the same stream.
/// The optional counter records how many draws were rejected.
inline ComplexMatrix sample_inverse_ginibre(int n, Stream& rng, std::uint64_t* resamples = nullptr) {
  for (;;) {
    const ComplexMatrix g = sample_ginibre(n, rng);
    const Eigen::PartialPivLU<MatrixXc> lu(g.entries);
    const double rcond = lu.rcond();
    if (!(rcond * kMaxCondition >= 1.0)) {
      if (resamples) ++*resamples;
      continue;
    }
    ComplexMatrix out;
    out.entries = lu.inverse();
    return out;
  }
}

/// X^(M) = X_M ... X_1 with X_j = G_j^-1, returned as the Gram matrix X^(M)^dagger X^(M) (not symmetrized).
inline MatrixXc sample_product_gram(int n, int m, Stream& rng, std::uint64_t* resamples = nullptr) {
  MatrixXc x = sample_inverse_ginibre(n, rng, resamples).entries;
  for (int j = 1; j < m; ++j) x = sample_inverse_ginibre(n, rng, resamples).entries * x;
  MatrixXc gram(n, n);
  gram.noalias() = x.adjoint() * x;
  return gram;
}

/// Y_L^(M) = L^-(M+1) sum_l (X_l^(M))^dagger X_l^(M)
inline ComplexMatrix sample_sum_Y(const EnsembleSpec& spec, Stream& rng, std::uint64_t* resamples = nullptr) {
  spec.validate();
  ComplexMatrix out;
  out.entries = MatrixXc::Zero(spec.n, spec.n);
  for (int l = 0; l < spec.l; ++l) out.entries += sample_product_gram(spec.n, spec.m, rng, resamples);
  if (spec.l > 1) out.entries *= std::pow(static_cast<double>(spec.l), -(spec.m + 1.0));
  symmetrize(out.entries);
  out.tag = StructureTag::hermitian_positive_definite;
  return out;
}

/// Block-diagonal direct sum of L unscaled Gram blocks, drawn in the same order as sample_sum_Y.
inline ComplexMatrix sample_direct_sum(const EnsembleSpec& spec, Stream& rng, std::uint64_t* resamples = nullptr) {
  spec.validate();
  ComplexMatrix out;
  out.tag = StructureTag::block_diagonal;
  for (int l = 0; l < spec.l; ++l) {
    MatrixXc block = sample_product_gram(spec.n, spec.m, rng, resamples);
    symmetrize(block);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

/// GUE with weight exp(-tr H^2 / (2 sigma^2)).
inline ComplexMatrix sample_gue(int n, double sigma, Stream& rng) {
  if (n < 1 || !(sigma > 0.0)) throw std::invalid_argument("sample_gue: n >= 1 and sigma > 0");
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix out;
  out.entries.resize(n, n);
  const double off = sigma / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    out.entries(j, j) = sigma * g(rng);
    for (int i = j + 1; i < n; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      out.entries(i, j) = {off * re, off * im};
      out.entries(j, i) = std::conj(out.entries(i, j));
    }
  }
  out.tag = StructureTag::hermitian;
  return out;
}

/// sqrt(x) H with x one-sided stable of exponent alpha/2 and H ~ GUE(sigma = 1).
inline ComplexMatrix sample_stable_gue(int n, double alpha, Stream& rng) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("sample_stable_gue: 0 < alpha < 2");
  const double x = OneSidedStable({alpha / 2.0}).sample(rng);
  ComplexMatrix out = sample_gue(n, 1.0, rng);
  out.entries *= std::sqrt(x);
  return out;
}

inline ComplexMatrix sample(const EnsembleSpec& spec, Stream& rng, std::uint64_t* resamples = nullptr) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleKind::inverse_ginibre_sum: return sample_sum_Y(spec, rng, resamples);
    case EnsembleKind::inverse_ginibre_direct_sum: return sample_direct_sum(spec, rng, resamples);
    case EnsembleKind::gue: return sample_gue(spec.n, spec.sigma, rng);
    case EnsembleKind::stable_gue: return sample_stable_gue(spec.n, spec.alpha, rng);
  }
  throw std::logic_error("unreachable");
}

}  // namespace htrm
