#pragma once

#include "ripless/ensembles.hpp"
#include "ripless/rng.hpp"
#include "ripless/types.hpp"

#include <optional>
#include <vector>

namespace ripless::certificates {

/// Batch schedule for the golfing construction. Per-stage vectors have
/// length `ell`; batches drawn after stage ell reuse the last entry.
struct GolfingConfig {
  int ell = 2;
  std::vector<Index> batch_sizes;
  std::vector<double> c;
  std::vector<double> t;
  int max_extra_batches = 0;
  /// Hard cap on the total number of sampled rows, rejected batches
  /// included. Unset means unlimited.
  std::optional<Index> row_budget;

  /// ell = ceil(log2(s)/2) + 2; c = 1/(2 sqrt(log n)) for the first two
  /// stages and 1/2 afterwards; t = 1/(8 sqrt s) then log n/(8 sqrt s);
  /// m_i = ceil(prefactor * s * mu / c_i^2); 3 ceil(log n) + 1 extra batches.
  static GolfingConfig standard(Index n, Index s, double prefactor = 2.0, double mu = 1.0);

  /// The standard schedule with the largest prefactor whose base batches
  /// fit in `total_rows`; the same number is installed as the row budget.
  static GolfingConfig fit_to_budget(Index n, Index s, Index total_rows, double mu = 1.0);

  Index base_rows() const;
  Index stage_size(int stage) const;
  double stage_c(int stage) const;
  double stage_t(int stage) const;
  void validate() const;
};

struct BatchRecord {
  int stage = 0;  // 0-based golfing stage the batch was tried for
  Index rows = 0;
  bool accepted = false;
  double q_norm_before = 0.0;
  double q_norm_after = 0.0;      // candidate ||q_i||_2
  double off_support_inf = 0.0;   // ||(m/m_i) A_{i,T^c}^* A_{i,T} q_{i-1}||_inf
};

struct DualCertificate {
  RealVector v;  // length n
  /// Weights on the rows of the real system (realified when complex), so
  /// that v = A^T w.
  RealVector w;
  std::vector<double> q_norms;  // ||q_0||, then ||q_i|| per accepted batch
  std::vector<BatchRecord> batch_log;
  bool success = false;
  Index rows_used = 0;  // sampled rows (complex samples count once), discarded batches included
  int batches_used = 0;
  double reconstruction_residual = 0.0;  // ||A^T w - v||_2
};

/// Supplies raw rows a_k^* for successive golfing batches.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual Index n() const = 0;
  virtual Field field() const = 0;
  /// Next `count` raw rows, or nullopt when the source cannot supply them.
  virtual std::optional<ComplexMatrix> next(Index count) = 0;
};

/// Fresh iid rows from an ensemble; keeps every drawn row.
class EnsembleBatchSource final : public BatchSource {
 public:
  EnsembleBatchSource(ensembles::EnsembleSpec spec, Rng rng);
  Index n() const override { return spec_.n(); }
  Field field() const override { return spec_.field(); }
  std::optional<ComplexMatrix> next(Index count) override;

 private:
  ensembles::EnsembleSpec spec_;
  Rng rng_;
};

/// Consecutive row blocks of an already drawn matrix.
class MatrixBatchSource final : public BatchSource {
 public:
  explicit MatrixBatchSource(const MeasurementMatrix& A);
  Index n() const override { return raw_.cols(); }
  Field field() const override { return field_; }
  std::optional<ComplexMatrix> next(Index count) override;

 private:
  ComplexMatrix raw_;
  Field field_;
  Index offset_ = 0;
};

struct GolfingRun {
  MeasurementMatrix A;  // every sampled row, normalized by the total count
  DualCertificate certificate;
};

/// Golfing iteration on batches from `source`. The returned A stacks every
/// drawn row (rejected batches included) with scaling 1/sqrt(rows_used);
/// w refers to real_system(A). Only the sign of sign_pattern on T is read.
/// Throws BudgetExceeded if not even the first batch can be drawn.
GolfingRun golfing_scheme(BatchSource& source, const SupportSet& T, const RealVector& sign_pattern,
                          const GolfingConfig& config);

/// Golfing on consecutive row blocks of a pre-drawn matrix; w refers to
/// real_system(A), with zero weight on rows never used.
DualCertificate golfing_scheme(const MeasurementMatrix& A, const SupportSet& T, const RealVector& sign_pattern,
                               const GolfingConfig& config);

/// Golfing with batches drawn from `spec` on demand.
GolfingRun golfing_from_ensemble(const ensembles::EnsembleSpec& spec, const SupportSet& T,
                                 const RealVector& sign_pattern, const GolfingConfig& config, Rng rng);

struct ExactDualityReport {
  double row_space_residual = 0.0;  // least-squares distance of v from range(A^T)
  double sign_error = 0.0;          // ||v_T - sgn(x_T)||_inf
  double off_support_max = 0.0;     // ||v_{T^c}||_inf
  double off_support_margin = 0.0;  // 1 - off_support_max
  bool in_row_space = false;
  bool sign_match = false;
  bool pass = false;
};

/// v in the row space of A, v_T = sgn(x_T), ||v_{T^c}||_inf < 1. Throws
/// PreconditionViolation when A_T is rank deficient.
ExactDualityReport verify_exact_duality(const RealVector& v, const RealMatrix& A, const SupportSet& T,
                                        const RealVector& x);

struct InexactDualityReport {
  double gram_inverse_norm = 0.0;        // ||(A_T^* A_T)^{-1}||, <= 2
  double max_cross_correlation = 0.0;    // max_{i in T^c} ||A_T^* A_i||_2, <= 1
  double sign_residual = 0.0;            // ||v_T - sgn(x_T)||_2, <= 1/4
  double off_support_max = 0.0;          // ||v_{T^c}||_inf, <= 1/4
  double gram_margin = 0.0;
  double cross_margin = 0.0;
  double sign_margin = 0.0;
  double off_support_margin = 0.0;
  bool gram_ok = false;
  bool cross_ok = false;
  bool sign_ok = false;
  bool off_support_ok = false;
  bool pass = false;
};

InexactDualityReport verify_inexact_duality(const RealVector& v, const RealMatrix& A, const SupportSet& T,
                                            const RealVector& x);
InexactDualityReport verify_inexact_duality(const DualCertificate& cert, const RealMatrix& A,
                                            const SupportSet& T, const RealVector& x);

struct WNormCheck {
  double ratio = 0.0;  // ||w||_2 / sqrt(s)
  double bound = 10.0;
  bool pass = false;
};

/// Throws PreconditionViolation unless cert.success.
WNormCheck certificate_w_norm_check(const DualCertificate& cert, Index s, double c0 = 10.0);

struct ExactCertificate {
  RealVector v;
  RealVector w;
};

/// Least-squares correction on T: w' = w + A_T (A_T^T A_T)^{-1} (sgn - v_T),
/// which makes v'_T = sgn(x_T) exactly.
ExactCertificate tighten_certificate(const RealVector& w, const RealMatrix& A, const SupportSet& T,
                                     const RealVector& sign_pattern);

}  // namespace ripless::certificates
