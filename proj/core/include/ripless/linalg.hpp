#pragma once

#include "ripless/types.hpp"

#include <utility>

namespace ripless::linalg {

/// Extreme eigenvalues (min, max) of a Hermitian matrix, via a dense solver.
std::pair<double, double> hermitian_extremes(const RealMatrix& G);
std::pair<double, double> hermitian_extremes(const ComplexMatrix& G);

/// ||G - I|| for Hermitian G, i.e. max(|lambda_min - 1|, |lambda_max - 1|).
double identity_deviation(const RealMatrix& G);
double identity_deviation(const ComplexMatrix& G);

double min_singular_value(const RealMatrix& M);

/// Row space of A via two pivoted QRs, A = Q1 L Q2^T with L (r x r) lower
/// triangular and invertible. Handles rank deficiency,
/// which realified Fourier draws produce routinely (repeated and conjugate
/// frequencies).
class RowSpace {
 public:
  explicit RowSpace(const RealMatrix& A, double relative_rank_tol = 1e-12);

  Index rank() const { return rank_; }
  /// Orthogonal projection of v (length n) onto {x : A x = y}.
  RealVector project_affine(const RealVector& v, const RealVector& y) const;
  /// Minimum-norm least-squares solution of A x = y.
  RealVector solve(const RealVector& y) const;
  /// Minimum-norm w with A^T w closest to v (least squares in the row space).
  RealVector solve_transpose(const RealVector& v) const;
  /// Distance from v to the row space of A.
  double row_space_residual(const RealVector& v) const;

 private:
  RealMatrix Q1_;  // m x r, orthonormal
  RealMatrix L_;   // r x r, lower triangular
  RealMatrix Q2_;  // n x r, orthonormal basis of the row space
  Index rank_ = 0;
};

}  // namespace ripless::linalg
