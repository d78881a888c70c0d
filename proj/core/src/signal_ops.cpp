#include "ripless/signal_ops.hpp"

#include "ripless/linalg.hpp"
#include "ripless/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ripless {

Signal best_s_approx(const Signal& x, Index s) {
  const Index n = x.size();
  if (s < 0 || s > n) throw InvalidArgument("best_s_approx: require 0 <= s <= n");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  RealVector out = RealVector::Zero(n);
  for (Index k = 0; k < s; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    out[i] = x[i];
  }
  return Signal(std::move(out));
}

RealVector sgn(const RealVector& x) {
  return x.unaryExpr([](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); });
}

Signal sgn(const Signal& x) { return Signal(sgn(x.entries())); }

ComplexMatrix restrict(const MeasurementMatrix& A, const SupportSet& T) {
  if (T.ambient() != A.cols()) throw InvalidArgument("restrict: support dimension mismatch");
  return A.entries()(Eigen::all, T.indices());
}

RealMatrix restrict(const RealMatrix& A, const SupportSet& T) {
  if (T.ambient() != A.cols()) throw InvalidArgument("restrict: support dimension mismatch");
  return A(Eigen::all, T.indices());
}

RealVector gather(const RealVector& v, const std::vector<Index>& idx) { return v(idx); }

double max_column_norm(const MeasurementMatrix& A) {
  return A.entries().colwise().norm().maxCoeff();
}

double max_column_norm(const RealMatrix& A) {
  if (A.cols() == 0) return 0.0;
  return A.colwise().norm().maxCoeff();
}

namespace {

constexpr Index kDirectSvdLimit = 64;
constexpr int kPowerIterations = 10000;
constexpr double kPowerTolerance = 1e-10;

template <typename MatrixType>
double largest_singular_value_svd(const MatrixType& M) {
  Eigen::JacobiSVD<MatrixType> svd(M);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

template <typename MatrixType>
double operator_norm_impl(const MatrixType& M) {
  using Vector = Eigen::Matrix<typename MatrixType::Scalar, Eigen::Dynamic, 1>;
  if (M.size() == 0) return 0.0;
  if (std::min(M.rows(), M.cols()) <= kDirectSvdLimit) return largest_singular_value_svd(M);

  // Fixed-seed Gaussian start: generic with probability one, and the result
  // does not depend on any caller RNG.
  Rng start(0x6f70657261746f72ULL);
  Vector v(M.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = start.normal();
  v.normalize();
  for (int it = 0; it < kPowerIterations; ++it) {
    Vector w = M.adjoint() * (M * v);
    const double rayleigh = std::real(v.dot(w));
    if (!(rayleigh > 0.0)) return largest_singular_value_svd(M);
    // Residual test bounds the eigenvalue error of the Gram matrix.
    if ((w - rayleigh * v).norm() <= kPowerTolerance * rayleigh) return std::sqrt(rayleigh);
    v = w / w.norm();
  }
  return largest_singular_value_svd(M);
}

}  // namespace

double operator_norm(const RealMatrix& M) { return operator_norm_impl(M); }
double operator_norm(const ComplexMatrix& M) { return operator_norm_impl(M); }

RealMatrix realify(const ComplexMatrix& A) {
  RealMatrix out(2 * A.rows(), A.cols());
  out.topRows(A.rows()) = A.real();
  out.bottomRows(A.rows()) = A.imag();
  return out;
}

RealVector realify(const ComplexVector& y) {
  RealVector out(2 * y.size());
  out.head(y.size()) = y.real();
  out.tail(y.size()) = y.imag();
  return out;
}

std::pair<RealMatrix, RealVector> realify(const MeasurementMatrix& A, const MeasurementVector& y) {
  if (A.rows() != y.size()) throw InvalidArgument("realify: dimension mismatch");
  return {realify(A.entries()), realify(y.entries())};
}

std::pair<RealMatrix, RealVector> real_system(const MeasurementMatrix& A,
                                              const MeasurementVector& y) {
  if (A.rows() != y.size()) throw InvalidArgument("real_system: dimension mismatch");
  if (A.field() == Field::Real && y.field() == Field::Real) return {A.real(), y.real()};
  return realify(A, y);
}

RealMatrix real_system(const MeasurementMatrix& A) {
  return A.field() == Field::Real ? A.real() : realify(A.entries());
}

}  // namespace ripless
