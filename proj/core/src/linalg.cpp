#include "ripless/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ripless::linalg {

namespace {

template <typename MatrixType>
std::pair<double, double> extremes(const MatrixType& G) {
  if (G.rows() == 0) return {1.0, 1.0};
  Eigen::SelfAdjointEigenSolver<MatrixType> eig(G, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

}  // namespace

std::pair<double, double> hermitian_extremes(const RealMatrix& G) { return extremes(G); }
std::pair<double, double> hermitian_extremes(const ComplexMatrix& G) { return extremes(G); }

double identity_deviation(const RealMatrix& G) {
  if (G.rows() == 0) return 0.0;
  auto [lo, hi] = extremes(G);
  return std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
}

double identity_deviation(const ComplexMatrix& G) {
  if (G.rows() == 0) return 0.0;
  auto [lo, hi] = extremes(G);
  return std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
}

double min_singular_value(const RealMatrix& M) {
  if (M.cols() == 0) return 0.0;
  if (M.rows() < M.cols()) return 0.0;
  Eigen::JacobiSVD<RealMatrix> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

RowSpace::RowSpace(const RealMatrix& A, double relative_rank_tol) {
  // SVD is avoided on purpose: Eigen's BDCSVD loses accuracy on the highly
  // degenerate spectra of subsampled orthogonal matrices.
  const double tol = relative_rank_tol * static_cast<double>(std::max(A.rows(), A.cols()));
  Eigen::ColPivHouseholderQR<RealMatrix> qr(A);  // A P = Q R
  qr.setThreshold(tol);
  rank_ = qr.rank();
  Q1_ = qr.householderQ() * RealMatrix::Identity(A.rows(), rank_);
  // B = R_1 P^T is r x n with full row rank; B^T = Q2 R2.
  const RealMatrix R1 = qr.matrixR().topRows(rank_).triangularView<Eigen::Upper>();
  const RealMatrix Bt = qr.colsPermutation() * R1.transpose();
  Eigen::HouseholderQR<RealMatrix> qr2(Bt);
  Q2_ = qr2.householderQ() * RealMatrix::Identity(A.cols(), rank_);
  L_ = qr2.matrixQR().topRows(rank_).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
}

RealVector RowSpace::solve(const RealVector& y) const {
  if (rank_ == 0) return RealVector::Zero(Q2_.rows());
  const RealVector c = L_.triangularView<Eigen::Lower>().solve(Q1_.transpose() * y);
  return Q2_ * c;
}

RealVector RowSpace::project_affine(const RealVector& v, const RealVector& y) const {
  return v - Q2_ * (Q2_.transpose() * v) + solve(y);
}

RealVector RowSpace::solve_transpose(const RealVector& v) const {
  if (rank_ == 0) return RealVector::Zero(Q1_.rows());
  const RealVector c = L_.transpose().triangularView<Eigen::Upper>().solve(Q2_.transpose() * v);
  return Q1_ * c;
}

double RowSpace::row_space_residual(const RealVector& v) const {
  return (v - Q2_ * (Q2_.transpose() * v)).norm();
}

}  // namespace ripless::linalg
