#include "ripless/estimates.hpp"

#include "ripless/linalg.hpp"
#include "ripless/parallel.hpp"
#include "ripless/signal_ops.hpp"
#include "ripless/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ripless::estimates {

namespace {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

// Calls fn on every k-subset of pool (lexicographic order of positions).
template <typename Fn>
void for_each_combination(const std::vector<Index>& pool, Index k, Fn fn) {
  const auto size = static_cast<Index>(pool.size());
  if (k > size) return;
  std::vector<Index> pos(static_cast<std::size_t>(k));
  std::iota(pos.begin(), pos.end(), Index{0});
  std::vector<Index> subset(static_cast<std::size_t>(k));
  for (;;) {
    for (Index i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])];
    fn(subset);
    Index i = k - 1;
    while (i >= 0 && pos[static_cast<std::size_t>(i)] == size - k + i) --i;
    if (i < 0) return;
    ++pos[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
  }
}

std::vector<Index> merged(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::vector<Index> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

EmpiricalReport make_report(std::int64_t failures, std::int64_t trials, double bound, bool in_range) {
  EmpiricalReport r;
  r.trials = trials;
  r.failures = failures;
  r.empirical_rate = static_cast<double>(failures) / static_cast<double>(trials);
  r.theoretical_bound = bound;
  const stats::Interval ci = stats::clopper_pearson(failures, trials);
  r.ci_lower = ci.lower;
  r.ci_upper = ci.upper;
  r.in_stated_range = in_range;
  r.pass = r.ci_lower <= bound;
  return r;
}

double default_mu(const ensembles::EnsembleSpec& spec, Index m) {
  if (spec.family() == ensembles::Family::Gaussian)
    return ensembles::stochastic_coherence(spec, m, ensembles::gaussian_tail_model(spec.n())).mu;
  return ensembles::deterministic_coherence(spec).mu;
}

bool estimate_event(Estimate which, const ComplexMatrix& A, const SupportSet& T, const RealVector& v,
                    double level) {
  const std::vector<Index>& Ti = T.indices();
  const std::vector<Index> Tc = T.complement();
  switch (which) {
    case Estimate::E1: {
      const ComplexMatrix AT = A(Eigen::all, Ti);
      return linalg::identity_deviation(ComplexMatrix(AT.adjoint() * AT)) >= level;
    }
    case Estimate::E2: {
      // Restricted to T, the form the golfing contraction q_i uses.
      const ComplexMatrix AT = A(Eigen::all, Ti);
      const ComplexVector vT = RealVector(v(Ti)).cast<Complex>();
      return (AT.adjoint() * (AT * vT) - vT).norm() >= level * v.norm();
    }
    case Estimate::E3: {
      if (Tc.empty()) return false;
      const ComplexVector u = A.adjoint() * (A * v.cast<Complex>());
      return ComplexVector(u(Tc)).cwiseAbs().maxCoeff() >= level * v.norm();
    }
    case Estimate::E4: {
      if (Tc.empty()) return false;
      const ComplexMatrix C = A(Eigen::all, Ti).adjoint() * A(Eigen::all, Tc);
      return C.colwise().norm().maxCoeff() >= level;
    }
  }
  throw InvalidArgument("unknown estimate");
}

EmpiricalReport empirical_estimate(const EstimateQuery& query, const ensembles::EnsembleSpec& spec,
                                   Index trials, const Rng& rng, unsigned threads) {
  if (trials < 1) throw InvalidArgument("empirical_estimate: trials must be >= 1");
  if (query.m < 1) throw InvalidArgument("empirical_estimate: m must be >= 1");
  const Index n = spec.n();
  if (query.T.ambient() != n || query.T.size() < 1)
    throw InvalidArgument("empirical_estimate: T must be a nonempty subset of {1..n}");
  RealVector v = RealVector::Zero(n);
  if (query.v) {
    v = *query.v;
    if (v.size() != n) throw InvalidArgument("empirical_estimate: v must have length n");
    for (Index i : query.T.complement())
      if (v[i] != 0.0) throw InvalidArgument("empirical_estimate: v must be supported on T");
    if (v.norm() == 0.0) throw InvalidArgument("empirical_estimate: v must be nonzero");
  } else {
    v(query.T.indices()).setOnes();
  }

  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t k) {
    Rng stream = rng.split(k);
    const MeasurementMatrix A = ensembles::build_matrix(spec, query.m, stream);
    hit[k] = estimate_event(query.which, A.entries(), query.T, v, query.level) ? 1 : 0;
  });
  const auto failures = std::count(hit.begin(), hit.end(), char{1});

  TailBoundQuery q;
  q.which = query.which;
  q.m = query.m;
  q.s = query.T.size();
  q.n = n;
  q.mu = query.mu ? *query.mu : default_mu(spec, query.m);
  q.level = query.level;
  const TailBound b = tail(q);
  return make_report(failures, trials, b.value, b.in_stated_range);
}

WeakRipReport weak_rip_empirical(const ComplexMatrix& A, const SupportSet& T, Index r, double delta,
                                 WeakRipMode mode, std::int64_t budget, Rng& rng) {
  const Index n = A.cols();
  if (T.ambient() != n) throw InvalidArgument("weak_rip_empirical: support dimension mismatch");
  if (r < 0 || T.size() + r > n) throw InvalidArgument("weak_rip_empirical: need |T| + r <= n");
  const std::vector<Index> Tc = T.complement();
  const ComplexMatrix G = A.adjoint() * A;

  WeakRipReport rep;
  rep.max_deviation = -1.0;
  auto consider = [&](const std::vector<Index>& R) {
    std::vector<Index> sorted = R;
    std::sort(sorted.begin(), sorted.end());
    const std::vector<Index> S = merged(T.indices(), sorted);
    const double dev = S.empty() ? 0.0 : linalg::identity_deviation(ComplexMatrix(G(S, S)));
    ++rep.sets_examined;
    if (dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.witness = sorted;
    }
  };

  if (mode == WeakRipMode::Exhaustive) {
    const double count = binomial(static_cast<Index>(Tc.size()), r);
    if (count > 1e5)
      throw BudgetExceeded("weak_rip_empirical: " + std::to_string(static_cast<long long>(count)) +
                           " candidate sets exceed the exhaustive limit of 1e5; use sampled mode");
    for_each_combination(Tc, r, consider);
  } else {
    if (budget < 1) throw InvalidArgument("weak_rip_empirical: sampled mode needs budget >= 1");
    std::vector<Index> pool = Tc;
    for (std::int64_t b = 0; b < budget; ++b) {
      for (Index i = 0; i < r; ++i) {
        const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(pool.size()) -
                                                                static_cast<std::uint64_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      }
      consider(std::vector<Index>(pool.begin(), pool.begin() + r));
    }
    rep.lower_bound_estimate = true;
  }
  rep.violates = rep.max_deviation > delta;
  return rep;
}

double rip_constant_exact(const ComplexMatrix& A, Index s) {
  const Index n = A.cols();
  if (s < 0 || s > n) throw InvalidArgument("rip_constant_exact: need 0 <= s <= n");
  if (s == 0) return 0.0;
  const double count = binomial(n, s);
  if (count > 1e6)
    throw BudgetExceeded("rip_constant_exact: " + std::to_string(static_cast<long long>(count)) +
                         " subsets exceed the limit of 1e6");
  const ComplexMatrix G = A.adjoint() * A;
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  double delta = 0.0;
  for_each_combination(all, s, [&](const std::vector<Index>& S) {
    delta = std::max(delta, linalg::identity_deviation(ComplexMatrix(G(S, S))));
  });
  return delta;
}

double rip_constant_exact(const RealMatrix& A, Index s) { return rip_constant_exact(ComplexMatrix(A.cast<Complex>()), s); }

NoiseCorrelation noise_correlation_bound(const RealMatrix& A, double sigma, bool with_projection,
                                         const std::optional<SupportSet>& T) {
  const Index n = A.cols();
  if (n < 2) throw InvalidArgument("noise_correlation_bound: n must be >= 2");
  if (!(sigma >= 0.0)) throw InvalidArgument("noise_correlation_bound: sigma must be >= 0");
  NoiseCorrelation out;
  out.sigma = sigma;
  out.correlator = A;
  if (with_projection) {
    if (!T) throw InvalidArgument("noise_correlation_bound: projection requires a support T");
    if (T->ambient() != n) throw InvalidArgument("noise_correlation_bound: support dimension mismatch");
    if (T->size() > 0) {
      const RealMatrix AT = A(Eigen::all, T->indices());
      if (linalg::min_singular_value(AT) <= 1e-10)
        throw PreconditionViolation("noise_correlation_bound: A_T is rank deficient");
      // (I - P)A = A - A_T (A_T^T A_T)^{-1} A_T^T A
      out.correlator = A - AT * (AT.transpose() * AT).ldlt().solve(AT.transpose() * A);
    }
  }
  out.threshold = 2.0 * sigma * max_column_norm(out.correlator) * std::sqrt(std::log(static_cast<double>(n)));
  out.failure_bound = 1.0 / (2.0 * static_cast<double>(n));
  return out;
}

EmpiricalReport noise_correlation_empirical(const NoiseCorrelation& bound, Index draws, const Rng& rng,
                                           unsigned threads) {
  if (draws < 1) throw InvalidArgument("noise_correlation_empirical: draws must be >= 1");
  const RealMatrix& M = bound.correlator;
  std::vector<char> hit(static_cast<std::size_t>(draws), 0);
  parallel_for(static_cast<std::size_t>(draws), threads, [&](std::size_t k) {
    Rng stream = rng.split(k);
    RealVector z(M.rows());
    for (Index i = 0; i < z.size(); ++i) z[i] = bound.sigma * stream.normal();
    const RealVector c = M.transpose() * z;
    const double stat = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    hit[k] = stat > bound.threshold ? 1 : 0;
  });
  const auto failures = std::count(hit.begin(), hit.end(), char{1});
  return make_report(failures, draws, bound.failure_bound);
}

}  // namespace ripless::estimates
