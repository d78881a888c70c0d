#include "ripless/certificates.hpp"

#include "ripless/linalg.hpp"
#include "ripless/signal_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ripless::certificates {

namespace {

double log_n(Index n) { return std::log(static_cast<double>(n)); }

std::vector<Index> sizes_for(const GolfingConfig& cfg, Index s, double prefactor, double mu) {
  std::vector<Index> sizes;
  for (double c : cfg.c)
    sizes.push_back(static_cast<Index>(std::ceil(prefactor * static_cast<double>(s) * mu / (c * c))));
  return sizes;
}

}  // namespace

GolfingConfig GolfingConfig::standard(Index n, Index s, double prefactor, double mu) {
  if (n < 2) throw InvalidArgument("golfing: n must be >= 2");
  if (s < 1 || s > n) throw InvalidArgument("golfing: need 1 <= s <= n");
  if (!(prefactor > 0.0) || !(mu >= 1.0)) throw InvalidArgument("golfing: prefactor > 0 and mu >= 1 required");
  GolfingConfig cfg;
  const double sd = static_cast<double>(s);
  cfg.ell = static_cast<int>(std::ceil(std::log2(sd) / 2.0)) + 2;
  for (int i = 0; i < cfg.ell; ++i) {
    const bool early = i < 2;
    cfg.c.push_back(early ? 1.0 / (2.0 * std::sqrt(log_n(n))) : 0.5);
    cfg.t.push_back(early ? 1.0 / (8.0 * std::sqrt(sd)) : log_n(n) / (8.0 * std::sqrt(sd)));
  }
  cfg.batch_sizes = sizes_for(cfg, s, prefactor, mu);
  cfg.max_extra_batches = 3 * static_cast<int>(std::ceil(log_n(n))) + 1;
  return cfg;
}

GolfingConfig GolfingConfig::fit_to_budget(Index n, Index s, Index total_rows, double mu) {
  GolfingConfig cfg = standard(n, s, 1.0, mu);
  auto base = [&](double p) {
    Index sum = 0;
    for (Index m : sizes_for(cfg, s, p, mu)) sum += m;
    return sum;
  };
  double lo = 0.0, hi = 1.0;
  while (base(hi) <= total_rows) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (base(mid) <= total_rows ? lo : hi) = mid;
  }
  if (lo <= 0.0 || base(lo) > total_rows)
    throw BudgetExceeded("golfing: " + std::to_string(total_rows) + " rows cannot hold the base schedule");
  cfg.batch_sizes = sizes_for(cfg, s, lo, mu);
  cfg.row_budget = total_rows;
  return cfg;
}

Index GolfingConfig::base_rows() const {
  Index sum = 0;
  for (Index m : batch_sizes) sum += m;
  return sum;
}

Index GolfingConfig::stage_size(int stage) const { return batch_sizes[static_cast<std::size_t>(std::min(stage, ell - 1))]; }
double GolfingConfig::stage_c(int stage) const { return c[static_cast<std::size_t>(std::min(stage, ell - 1))]; }
double GolfingConfig::stage_t(int stage) const { return t[static_cast<std::size_t>(std::min(stage, ell - 1))]; }

void GolfingConfig::validate() const {
  const auto l = static_cast<std::size_t>(ell);
  if (ell < 1 || batch_sizes.size() != l || c.size() != l || t.size() != l)
    throw InvalidArgument("GolfingConfig: ell and per-stage vectors disagree");
  for (std::size_t i = 0; i < l; ++i) {
    if (batch_sizes[i] < 1) throw InvalidArgument("GolfingConfig: batch sizes must be >= 1");
    if (!(c[i] > 0.0 && c[i] < 1.0)) throw InvalidArgument("GolfingConfig: c_i must lie in (0, 1)");
    if (!(t[i] > 0.0)) throw InvalidArgument("GolfingConfig: t_i must be > 0");
  }
  if (max_extra_batches < 0) throw InvalidArgument("GolfingConfig: max_extra_batches must be >= 0");
  if (row_budget && *row_budget < 1) throw InvalidArgument("GolfingConfig: row budget must be >= 1");
}

EnsembleBatchSource::EnsembleBatchSource(ensembles::EnsembleSpec spec, Rng rng)
    : spec_(std::move(spec)), rng_(rng) {}

std::optional<ComplexMatrix> EnsembleBatchSource::next(Index count) {
  ComplexMatrix B(count, spec_.n());
  for (Index k = 0; k < count; ++k) B.row(k) = ensembles::sample_row(spec_, rng_).adjoint();
  return B;
}

MatrixBatchSource::MatrixBatchSource(const MeasurementMatrix& A) : raw_(A.raw_rows()), field_(A.field()) {}

std::optional<ComplexMatrix> MatrixBatchSource::next(Index count) {
  if (offset_ + count > raw_.rows()) return std::nullopt;
  ComplexMatrix B = raw_.middleRows(offset_, count);
  offset_ += count;
  return B;
}

namespace {

struct Trace {
  DualCertificate cert;
  std::vector<ComplexMatrix> batches;
  // Per batch: raw-row weights omega (real and imaginary parts of the
  // realified rows); empty for rejected batches.
  std::vector<RealVector> omega_re, omega_im;
};

Trace run_golfing(BatchSource& source, const SupportSet& T, const RealVector& sign_pattern,
                  const GolfingConfig& config) {
  config.validate();
  const Index n = source.n();
  if (T.ambient() != n) throw InvalidArgument("golfing: support dimension mismatch");
  if (T.size() < 1) throw InvalidArgument("golfing: support must be nonempty");
  if (sign_pattern.size() != n) throw InvalidArgument("golfing: sign pattern must have length n");
  const std::vector<Index>& Ti = T.indices();
  const std::vector<Index> Tc = T.complement();
  const RealVector q0 = sgn(RealVector(sign_pattern(Ti)));
  if ((q0.array() == 0.0).any()) throw InvalidArgument("golfing: sign pattern vanishes on T");
  const bool complex = source.field() == Field::Complex;

  Trace tr;
  DualCertificate& cert = tr.cert;
  cert.v = RealVector::Zero(n);
  RealVector q = q0;
  cert.q_norms.push_back(q.norm());

  int stage = 0;
  const int max_batches = config.ell + config.max_extra_batches;
  while (stage < config.ell && cert.batches_used < max_batches) {
    const Index size = config.stage_size(stage);
    if (config.row_budget && cert.rows_used + size > *config.row_budget) break;
    std::optional<ComplexMatrix> B = source.next(size);
    if (!B) break;
    ++cert.batches_used;
    cert.rows_used += size;

    // P_i q = (1/m_i) sum_k r_k r_{k,T}^T q over the real rows r_k of the batch.
    const RealMatrix Rre = B->real();
    const RealVector pre = Rre(Eigen::all, Ti) * q;
    RealVector Pq = Rre.transpose() * pre;
    RealVector pim;
    if (complex) {
      const RealMatrix Rim = B->imag();
      pim = Rim(Eigen::all, Ti) * q;
      Pq += Rim.transpose() * pim;
    }
    Pq /= static_cast<double>(size);

    const RealVector q_next = q - RealVector(Pq(Ti));
    const double off = Tc.empty() ? 0.0 : RealVector(Pq(Tc)).cwiseAbs().maxCoeff();
    BatchRecord rec;
    rec.stage = stage;
    rec.rows = size;
    rec.q_norm_before = q.norm();
    rec.q_norm_after = q_next.norm();
    rec.off_support_inf = off;
    rec.accepted = rec.q_norm_after <= config.stage_c(stage) * rec.q_norm_before &&
                   off <= config.stage_t(stage) * rec.q_norm_before;
    cert.batch_log.push_back(rec);

    tr.batches.push_back(std::move(*B));
    if (rec.accepted) {
      cert.v += Pq;
      q = q_next;
      cert.q_norms.push_back(rec.q_norm_after);
      tr.omega_re.push_back(pre / static_cast<double>(size));
      tr.omega_im.push_back(complex ? RealVector(pim / static_cast<double>(size)) : RealVector());
      ++stage;
    } else {
      tr.omega_re.emplace_back();
      tr.omega_im.emplace_back();
    }
  }

  const double sign_residual = (RealVector(cert.v(Ti)) - q0).norm();
  const double off_max = Tc.empty() ? 0.0 : RealVector(cert.v(Tc)).cwiseAbs().maxCoeff();
  cert.success = stage == config.ell && sign_residual <= 0.25 && off_max <= 0.25;
  return tr;
}

// w on the rows of real_system(A), where A's raw rows start with the traced
// batches and row k of A is raw row k times `scaling`.
void assemble_w(Trace& tr, const MeasurementMatrix& A) {
  const Index m = A.rows();
  const bool complex = A.field() == Field::Complex;
  RealVector w = RealVector::Zero(complex ? 2 * m : m);
  Index offset = 0;
  for (std::size_t b = 0; b < tr.batches.size(); ++b) {
    const Index size = tr.batches[b].rows();
    if (tr.omega_re[b].size() > 0) {
      w.segment(offset, size) = tr.omega_re[b] / A.scaling();
      if (complex) w.segment(m + offset, size) = tr.omega_im[b] / A.scaling();
    }
    offset += size;
  }
  tr.cert.w = std::move(w);
  tr.cert.reconstruction_residual = (real_system(A).transpose() * tr.cert.w - tr.cert.v).norm();
}

}  // namespace

GolfingRun golfing_scheme(BatchSource& source, const SupportSet& T, const RealVector& sign_pattern,
                          const GolfingConfig& config) {
  Trace tr = run_golfing(source, T, sign_pattern, config);
  if (tr.cert.rows_used == 0) throw BudgetExceeded("golfing: no batch could be drawn");
  ComplexMatrix raw(tr.cert.rows_used, source.n());
  Index offset = 0;
  for (const ComplexMatrix& B : tr.batches) {
    raw.middleRows(offset, B.rows()) = B;
    offset += B.rows();
  }
  const double scaling = 1.0 / std::sqrt(static_cast<double>(tr.cert.rows_used));
  MeasurementMatrix A(raw * scaling, source.field(), scaling);
  assemble_w(tr, A);
  return GolfingRun{std::move(A), std::move(tr.cert)};
}

DualCertificate golfing_scheme(const MeasurementMatrix& A, const SupportSet& T, const RealVector& sign_pattern,
                               const GolfingConfig& config) {
  MatrixBatchSource source(A);
  Trace tr = run_golfing(source, T, sign_pattern, config);
  assemble_w(tr, A);
  return std::move(tr.cert);
}

GolfingRun golfing_from_ensemble(const ensembles::EnsembleSpec& spec, const SupportSet& T,
                                 const RealVector& sign_pattern, const GolfingConfig& config, Rng rng) {
  const std::uint64_t seed = rng.seed();
  EnsembleBatchSource source(spec, rng);
  GolfingRun run = golfing_scheme(source, T, sign_pattern, config);
  run.A = MeasurementMatrix(run.A.entries(), run.A.field(), run.A.scaling(),
                            Provenance{spec.to_json().dump(), seed});
  return run;
}

ExactDualityReport verify_exact_duality(const RealVector& v, const RealMatrix& A, const SupportSet& T,
                                        const RealVector& x) {
  const Index n = A.cols();
  if (v.size() != n || x.size() != n || T.ambient() != n)
    throw InvalidArgument("verify_exact_duality: dimension mismatch");
  const std::vector<Index>& Ti = T.indices();
  if (!Ti.empty() && linalg::min_singular_value(A(Eigen::all, Ti)) <= 1e-10)
    throw PreconditionViolation("verify_exact_duality: A_T is rank deficient");

  ExactDualityReport r;
  r.row_space_residual = linalg::RowSpace(A).row_space_residual(v);
  r.in_row_space = r.row_space_residual <= 1e-8;
  r.sign_error = Ti.empty() ? 0.0 : (RealVector(v(Ti)) - sgn(RealVector(x(Ti)))).cwiseAbs().maxCoeff();
  r.sign_match = r.sign_error <= 1e-8;
  const std::vector<Index> Tc = T.complement();
  r.off_support_max = Tc.empty() ? 0.0 : RealVector(v(Tc)).cwiseAbs().maxCoeff();
  r.off_support_margin = 1.0 - r.off_support_max;
  r.pass = r.in_row_space && r.sign_match && r.off_support_max < 1.0;
  return r;
}

InexactDualityReport verify_inexact_duality(const RealVector& v, const RealMatrix& A, const SupportSet& T,
                                            const RealVector& x) {
  const Index n = A.cols();
  if (v.size() != n || x.size() != n || T.ambient() != n)
    throw InvalidArgument("verify_inexact_duality: dimension mismatch");
  const std::vector<Index>& Ti = T.indices();
  const std::vector<Index> Tc = T.complement();
  const RealMatrix AT = A(Eigen::all, Ti);

  InexactDualityReport r;
  if (!Ti.empty()) {
    const double lmin = linalg::hermitian_extremes(RealMatrix(AT.transpose() * AT)).first;
    r.gram_inverse_norm = lmin > 0.0 ? 1.0 / lmin : std::numeric_limits<double>::infinity();
  }
  if (!Ti.empty() && !Tc.empty())
    r.max_cross_correlation = (AT.transpose() * A(Eigen::all, Tc)).colwise().norm().maxCoeff();
  r.sign_residual = Ti.empty() ? 0.0 : (RealVector(v(Ti)) - sgn(RealVector(x(Ti)))).norm();
  r.off_support_max = Tc.empty() ? 0.0 : RealVector(v(Tc)).cwiseAbs().maxCoeff();

  r.gram_margin = 2.0 - r.gram_inverse_norm;
  r.cross_margin = 1.0 - r.max_cross_correlation;
  r.sign_margin = 0.25 - r.sign_residual;
  r.off_support_margin = 0.25 - r.off_support_max;
  r.gram_ok = r.gram_margin >= 0.0;
  r.cross_ok = r.cross_margin >= 0.0;
  r.sign_ok = r.sign_margin >= 0.0;
  r.off_support_ok = r.off_support_margin >= 0.0;
  r.pass = r.gram_ok && r.cross_ok && r.sign_ok && r.off_support_ok;
  return r;
}

InexactDualityReport verify_inexact_duality(const DualCertificate& cert, const RealMatrix& A,
                                            const SupportSet& T, const RealVector& x) {
  return verify_inexact_duality(cert.v, A, T, x);
}

WNormCheck certificate_w_norm_check(const DualCertificate& cert, Index s, double c0) {
  if (!cert.success) throw PreconditionViolation("certificate_w_norm_check: certificate did not succeed");
  if (s < 1) throw InvalidArgument("certificate_w_norm_check: s must be >= 1");
  WNormCheck c;
  c.ratio = cert.w.norm() / std::sqrt(static_cast<double>(s));
  c.bound = c0;
  c.pass = c.ratio <= c0;
  return c;
}

ExactCertificate tighten_certificate(const RealVector& w, const RealMatrix& A, const SupportSet& T,
                                     const RealVector& sign_pattern) {
  if (w.size() != A.rows() || sign_pattern.size() != A.cols())
    throw InvalidArgument("tighten_certificate: dimension mismatch");
  const std::vector<Index>& Ti = T.indices();
  const RealMatrix AT = A(Eigen::all, Ti);
  const RealVector v = A.transpose() * w;
  const RealVector gap = sgn(RealVector(sign_pattern(Ti))) - RealVector(v(Ti));
  Eigen::LDLT<RealMatrix> gram(AT.transpose() * AT);
  if (gram.info() != Eigen::Success || !gram.isPositive())
    throw PreconditionViolation("tighten_certificate: A_T is rank deficient");
  ExactCertificate out;
  out.w = w + AT * gram.solve(gap);
  out.v = A.transpose() * out.w;
  return out;
}

}  // namespace ripless::certificates
