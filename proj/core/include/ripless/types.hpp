#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ripless {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

enum class Field { Real, Complex };

const char* to_string(Field field);
Field field_from_string(const std::string& name);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class NoValidCoherence : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// A real signal x in R^n (n >= 1, all entries finite).
class Signal {
 public:
  explicit Signal(RealVector entries);
  static Signal zeros(Index n);

  Index size() const { return entries_.size(); }
  const RealVector& entries() const { return entries_; }
  double operator[](Index i) const { return entries_[i]; }

 private:
  RealVector entries_;
};

/// Ordered set of column indices. Storage is 0-based and strictly increasing.
class SupportSet {
 public:
  SupportSet(std::vector<Index> indices, Index ambient);
  static SupportSet full(Index ambient);
  static SupportSet empty(Index ambient);
  static SupportSet of(const Signal& x, double threshold = 0.0);

  const std::vector<Index>& indices() const { return indices_; }
  Index ambient() const { return ambient_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool contains(Index i) const;
  std::vector<Index> complement() const;

 private:
  std::vector<Index> indices_;
  Index ambient_;
};

struct Provenance {
  std::string ensemble;  // serialized EnsembleSpec, or "explicit"
  std::uint64_t seed = 0;
};

/// The m x n sensing matrix. Row k holds a_k^* / sqrt(m) for ensemble draws;
/// `scaling()` records the factor that was applied (1 for explicit matrices).
class MeasurementMatrix {
 public:
  MeasurementMatrix(ComplexMatrix entries, Field field, double scaling = 1.0,
                    Provenance provenance = {});
  static MeasurementMatrix from_real(const RealMatrix& entries, Provenance provenance = {});

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  Field field() const { return field_; }
  double scaling() const { return scaling_; }
  const Provenance& provenance() const { return provenance_; }

  const ComplexMatrix& entries() const { return entries_; }
  /// Real view; throws InvalidArgument for complex matrices.
  RealMatrix real() const;
  /// Rows with the 1/sqrt(m) normalization undone, i.e. the sampled a_k^*.
  ComplexMatrix raw_rows() const;

 private:
  ComplexMatrix entries_;
  Field field_;
  double scaling_;
  Provenance provenance_;
};

/// y = A x + sigma_m z, stored over the matrix's scalar field.
class MeasurementVector {
 public:
  MeasurementVector(ComplexVector entries, Field field, double sigma_m = 0.0);
  static MeasurementVector from_real(const RealVector& entries, double sigma_m = 0.0);

  Index size() const { return entries_.size(); }
  Field field() const { return field_; }
  double sigma_m() const { return sigma_m_; }
  const ComplexVector& entries() const { return entries_; }
  RealVector real() const;

 private:
  ComplexVector entries_;
  Field field_;
  double sigma_m_;
};

}  // namespace ripless
