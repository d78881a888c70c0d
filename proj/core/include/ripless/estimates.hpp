#pragma once

#include "ripless/ensembles.hpp"
#include "ripless/rng.hpp"
#include "ripless/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ripless::estimates {

/// min(1, 2d exp(-(t^2/2) / (sigma^2 + B t/3))).
double matrix_bernstein_tail(double d, double B, double sigma_sq, double t);

/// min(1, exp(-t^2/(8 sigma^2) + 1/4)); valid for 0 <= t <= sigma^2/B.
double vector_bernstein_tail(double sigma_sq, double t);

enum class Estimate { E1, E2, E3, E4 };

std::string to_string(Estimate which);
Estimate estimate_from_string(const std::string& name);

/// Parameters of one tail bound. `level` is delta for E1 and t otherwise.
struct TailBoundQuery {
  Estimate which = Estimate::E1;
  Index m = 1;
  Index s = 1;
  Index n = 1;
  double mu = 1.0;
  double level = 0.5;

  void validate() const;
};

struct TailBound {
  double value = 1.0;
  /// False when the level lies outside the range the bound is stated for
  /// (t > 1/2 for E2, t > sqrt(s) for E4). The value is still the formula.
  bool in_stated_range = true;
};

/// 2s exp(-(m/(mu s)) delta^2 / (2(1 + delta/3))), clamped.
TailBound e1_tail(const TailBoundQuery& q);
/// exp(-(1/4)(t sqrt(m/(mu s)) - 1)^2), and 1 when t sqrt(m/(mu s)) < 1.
TailBound e2_tail(const TailBoundQuery& q);
/// 2n exp(-(m/(2 mu)) t^2 / (1 + sqrt(s) t/3)), clamped.
TailBound e3_tail(const TailBoundQuery& q);
/// n exp(-m t^2/(8 mu s) + 1/4), clamped.
TailBound e4_tail(const TailBoundQuery& q);
TailBound tail(const TailBoundQuery& q);

struct EmpiricalReport {
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  double empirical_rate = 0.0;
  double theoretical_bound = 1.0;
  double ci_lower = 0.0;  // Clopper-Pearson 95%
  double ci_upper = 1.0;
  bool in_stated_range = true;
  /// The observed rate is consistent with the bound: ci_lower <= bound,
  /// i.e. empirical_rate <= bound + (empirical_rate - ci_lower).
  bool pass = true;
};

EmpiricalReport make_report(std::int64_t failures, std::int64_t trials, double bound, bool in_range = true);

/// Coherence used for a theoretical bound when the caller supplies none:
/// deterministic where available, stochastic (Gaussian tail) otherwise.
double default_mu(const ensembles::EnsembleSpec& spec, Index m);

struct EstimateQuery {
  Estimate which = Estimate::E1;
  Index m = 1;
  SupportSet T = SupportSet::empty(1);
  /// Fixed vector supported on T for E2/E3; defaults to the indicator of T.
  std::optional<RealVector> v;
  double level = 0.5;
  std::optional<double> mu;
};

/// Event indicator for one matrix: E1 ||A_T^*A_T - I|| >= delta,
/// E2 ||(A_T^*A_T - I)v_T|| >= t||v||, E3 ||A_{T^c}^* A v||_inf >= t||v||,
/// E4 max_{i in T^c} ||A_T^* A_i|| >= t.
bool estimate_event(Estimate which, const ComplexMatrix& A, const SupportSet& T, const RealVector& v,
                    double level);

/// Draws `trials` fresh m x n matrices on streams rng.split(k) and counts
/// event occurrences. Deterministic for every thread count.
EmpiricalReport empirical_estimate(const EstimateQuery& query, const ensembles::EnsembleSpec& spec,
                                   Index trials, const Rng& rng, unsigned threads = 1);

enum class WeakRipMode { Exhaustive, Sampled };

struct WeakRipReport {
  double max_deviation = 0.0;       // max over R of ||A_{T u R}^* A_{T u R} - I||
  std::vector<Index> witness;       // R achieving the maximum
  std::int64_t sets_examined = 0;
  bool lower_bound_estimate = false;  // sampled mode: the true sup is at least this
  bool violates = false;              // max_deviation > delta
};

/// Exhaustive mode refuses (BudgetExceeded) when more than 1e5 sets exist.
WeakRipReport weak_rip_empirical(const ComplexMatrix& A, const SupportSet& T, Index r, double delta,
                                 WeakRipMode mode, std::int64_t budget, Rng& rng);

/// Smallest delta with (1 - delta)||v||^2 <= ||Av||^2 <= (1 + delta)||v||^2 for
/// every s-sparse v, by enumerating all s-subsets (refuses above 1e6).
double rip_constant_exact(const ComplexMatrix& A, Index s);
double rip_constant_exact(const RealMatrix& A, Index s);

struct NoiseCorrelation {
  double threshold = 0.0;       // 2 sigma ||M||_{1,2} sqrt(log n)
  double failure_bound = 0.0;   // 1 / (2n)
  RealMatrix correlator;        // M = A, or (I - P)A with P the projection onto range(A_T)
  double sigma = 1.0;
};

/// Throws InvalidArgument when with_projection is set without T, and
/// PreconditionViolation when A_T is rank deficient.
NoiseCorrelation noise_correlation_bound(const RealMatrix& A, double sigma = 1.0, bool with_projection = false,
                                         const std::optional<SupportSet>& T = std::nullopt);

/// Frequency of ||M^* sigma z||_inf > threshold over fresh standard Gaussian z.
EmpiricalReport noise_correlation_empirical(const NoiseCorrelation& bound, Index draws, const Rng& rng,
                                           unsigned threads = 1);

}  // namespace ripless::estimates
