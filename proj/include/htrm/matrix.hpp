#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace htrm {

using MatrixXc = Eigen::MatrixXcd;

enum class StructureTag { general, hermitian, hermitian_positive_definite, block_diagonal };

/// Dense complex matrix, or an ordered list of Hermitian blocks when block_diagonal.
struct ComplexMatrix {
  MatrixXc entries;
  StructureTag tag = StructureTag::general;
  std::vector<MatrixXc> blocks;

  int n() const {
    if (tag != StructureTag::block_diagonal) return static_cast<int>(entries.rows());
    int total = 0;
    for (const auto& b : blocks) total += static_cast<int>(b.rows());
    return total;
  }

  MatrixXc dense() const {
    if (tag != StructureTag::block_diagonal) return entries;
    MatrixXc out = MatrixXc::Zero(n(), n());
    int offset = 0;
    for (const auto& b : blocks) {
      out.block(offset, offset, b.rows(), b.cols()) = b;
      offset += static_cast<int>(b.rows());
    }
    return out;
  }
};

/// max |A_ij - conj(A_ji)| <= tol * max |A_ij|
inline bool is_hermitian(const MatrixXc& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void symmetrize(MatrixXc& a) {
  MatrixXc h = 0.5 * (a + a.adjoint());
  a = std::move(h);
}

}  // namespace htrm
