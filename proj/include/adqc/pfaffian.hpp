#pragma once

// Pfaffian of an even-dimensional antisymmetric matrix by Parlett-Reid
// tridiagonalization with partial pivoting, O(n^3).  Each step expands along
// the (k, k+1) pair and applies the skew rank-2 congruence update to the
// trailing block.  Only the strict upper triangle of the input is read; the
// lower triangle is rebuilt from it.

#include "adqc/common.hpp"

namespace adqc {

inline cplx pfaffian(Eigen::MatrixXcd a) {
  const Index n = a.rows();
  require(a.cols() == n, "pfaffian: matrix must be square");
  require(n % 2 == 0, "pfaffian: dimension must be even");
  if (n == 0) return 1.0;
  for (Index i = 0; i < n; ++i) {
    a(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) a(j, i) = -a(i, j);
  }

  cplx pf = 1.0;
  for (Index k = 0; k + 1 < n; k += 2) {
    // Pivot: largest entry of column k below the diagonal.
    Index kp = k + 1;
    double best = std::abs(a(k + 1, k));
    for (Index i = k + 2; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        kp = i;
      }
    if (best == 0.0) return 0.0;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    pf *= a(k, k + 1);

    const Index m = n - k - 2;  // trailing block size
    if (m == 0) break;
    // Pf([[T, B], [-B^T, C]]) = Pf(T) Pf(C + B^T T^{-1} B) with T the 2x2
    // pivot pair; the correction is a skew rank-2 update.
    const Eigen::VectorXcd tau = a.row(k).tail(m).transpose() / a(k, k + 1);
    const Eigen::VectorXcd col = a.col(k + 1).tail(m);
    a.bottomRightCorner(m, m).noalias() += tau * col.transpose();
    a.bottomRightCorner(m, m).noalias() -= col * tau.transpose();
  }
  return pf;
}

}  // namespace adqc
