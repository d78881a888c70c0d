#pragma once

#include "ripless/types.hpp"

#include <utility>

namespace ripless {

/// Best s-term approximation x_s: keeps the s largest-magnitude entries of x
/// and zeroes the rest. Equal magnitudes are resolved in favour of the lower
/// index. Throws InvalidArgument when s > n.
Signal best_s_approx(const Signal& x, Index s);

/// Componentwise sign with sgn(0) = 0.
Signal sgn(const Signal& x);
RealVector sgn(const RealVector& x);

/// Columns of A selected by T, in T's order (an m x |T| matrix).
ComplexMatrix restrict(const MeasurementMatrix& A, const SupportSet& T);
RealMatrix restrict(const RealMatrix& A, const SupportSet& T);

/// Rows/entries of a vector selected by an index list.
RealVector gather(const RealVector& v, const std::vector<Index>& idx);

/// ||A||_{1,2}: the largest column l2 norm.
double max_column_norm(const MeasurementMatrix& A);
double max_column_norm(const RealMatrix& A);

/// Largest singular value. Small matrices (min dimension <= 64) use a full
/// SVD; larger ones run power iteration on M^*M to 1e-10 relative and fall
/// back to a full SVD if 10 000 iterations are not enough.
double operator_norm(const RealMatrix& M);
double operator_norm(const ComplexMatrix& M);

/// Stacks real and imaginary parts: A' = [Re A; Im A], y' = [Re y; Im y].
/// For real x, ||A'x|| = ||Ax|| and <A'x, y'> = Re<Ax, y>.
std::pair<RealMatrix, RealVector> realify(const MeasurementMatrix& A, const MeasurementVector& y);
RealMatrix realify(const ComplexMatrix& A);
RealVector realify(const ComplexVector& y);

/// Real system handed to the solvers: the matrix itself when it is already
/// real, its realification otherwise.
std::pair<RealMatrix, RealVector> real_system(const MeasurementMatrix& A,
                                              const MeasurementVector& y);
RealMatrix real_system(const MeasurementMatrix& A);

}  // namespace ripless
