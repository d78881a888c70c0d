#pragma once

#include "ripless/rng.hpp"
#include "ripless/types.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>

namespace ripless::ensembles {

enum class Family {
  Gaussian,
  Binary,
  SubsampledOrthogonal,
  SubsampledDFT,
  RandomConvolution,
  CoordinateSampling,
  ContinuousFourier,
};

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// A row distribution F on C^n. Rows a ~ F are isotropic (E aa^* = I); a
/// measurement is <a, x> = a^* x.
class EnsembleSpec {
 public:
  static EnsembleSpec gaussian(Index n, std::uint64_t seed = 0);
  static EnsembleSpec binary(Index n, std::uint64_t seed = 0);
  static EnsembleSpec subsampled_dft(Index n, std::uint64_t seed = 0);
  static EnsembleSpec coordinate_sampling(Index n, std::uint64_t seed = 0);
  static EnsembleSpec continuous_fourier(Index n, std::uint64_t seed = 0);
  /// U must satisfy ||U^*U - nI|| <= 1e-8 n. Rows of U are sampled uniformly.
  static EnsembleSpec subsampled_orthogonal(ComplexMatrix U, std::uint64_t seed = 0,
                                            nlohmann::json params = {});
  /// Circular convolution with g. All Fourier coefficients of g must share
  /// one magnitude (to 1e-8 relative); g is rescaled so that magnitude is
  /// sqrt(n), which makes the convolution rows isotropic.
  static EnsembleSpec random_convolution(ComplexVector g, std::uint64_t seed = 0,
                                         nlohmann::json params = {});

  static EnsembleSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Same family and parameters at a different ambient dimension. Families
  /// carrying an explicit U or g only support this when they were built from
  /// a generator name ("hadamard", "dft", "random_phase").
  EnsembleSpec with_dimension(Index n) const;
  EnsembleSpec with_seed(std::uint64_t seed) const;

  Family family() const { return family_; }
  Index n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  Field field() const { return field_; }

  const ComplexMatrix& orthogonal() const { return orthogonal_; }
  const ComplexVector& filter() const { return filter_; }
  const ComplexVector& filter_spectrum() const { return spectrum_; }

 private:
  EnsembleSpec(Family family, Index n, std::uint64_t seed, Field field);

  Family family_;
  Index n_;
  std::uint64_t seed_;
  Field field_;
  ComplexMatrix orthogonal_;
  ComplexVector filter_;
  ComplexVector spectrum_;
  nlohmann::json params_ = nlohmann::json::object();
};

/// Sylvester Hadamard matrix (n a power of two), H^T H = nI.
ComplexMatrix hadamard(Index n);
/// Unnormalized DFT matrix U_kt = exp(-2 pi i k t / n), U^*U = nI.
ComplexMatrix dft_matrix(Index n);
/// Real filter with flat spectrum |g_hat(k)| = sqrt(n) and random phases.
ComplexVector random_phase_filter(Index n, Rng& rng);

/// One raw (un-normalized) row a ~ F.
ComplexVector sample_row(const EnsembleSpec& spec, Rng& rng);

/// m iid rows; row k of the result is a_k^* / sqrt(m).
MeasurementMatrix build_matrix(const EnsembleSpec& spec, Index m, Rng& rng);

enum class CoherenceMode { Deterministic, Stochastic };

struct CoherenceReport {
  double mu = 1.0;
  CoherenceMode mode = CoherenceMode::Deterministic;
  // Stochastic mode only: E[n^-1 ||a||^2 1_{E^c}] bound and P(E^c) bound at mu,
  // with their thresholds (1/20) n^{-3/2} and (nm)^{-1}.
  double excess_moment = 0.0;
  double excess_threshold = 0.0;
  double tail_probability = 0.0;
  double tail_threshold = 0.0;
};

/// Exact almost-sure bound max_t |a[t]|^2. Throws UnsupportedFamily for
/// Gaussian rows, which have no such bound.
CoherenceReport deterministic_coherence(const EnsembleSpec& spec);

/// Tail information for the stochastic coherence search.
struct TailModel {
  /// f(t) >= P(max_t |a[t]|^2 >= t); must be nonincreasing.
  std::function<double(double)> tail;
  /// Optional closed-form bound on E[||a||^2 1{max |a[t]|^2 > mu}]. When
  /// absent, n mu f(mu) + n int_mu^inf f(t) dt is used.
  std::function<double(double)> excess_moment;
};

/// Gaussian rows: f(t) = 2n P(Z >= sqrt t) via erfc, together with the
/// closed-form bound n (2n P(Z > sqrt mu) + 2 sqrt(mu) phi(sqrt mu)).
TailModel gaussian_tail_model(Index n);

/// Smallest mu in [1, 1e6] (bisection, 1e-6 relative) satisfying both tail
/// conditions. Throws NoValidCoherence if mu = 1e6 still fails.
CoherenceReport stochastic_coherence(const EnsembleSpec& spec, Index m, const TailModel& model);

/// Left-hand sides of the two stochastic-coherence conditions at a given mu,
/// in the normalized form E[n^-1 ||a||^2 1_{E^c}] and P(E^c).
std::pair<double, double> stochastic_conditions(Index n, double mu, const TailModel& model);

/// ||(1/N) sum a_k a_k^* - I|| over N fresh rows.
double isotropy_check(const EnsembleSpec& spec, Index num_samples, Rng& rng);

struct NearIsotropy {
  double deviation = 0.0;
  double threshold = 0.0;  // 1 / (8 sqrt n)
  bool pass = false;
};

NearIsotropy near_isotropy_deviation(const ComplexMatrix& W);

struct ConditionalMoment {
  ComplexMatrix second_moment;  // estimate of E[aa^* | max_t |a[t]|^2 <= mu]
  Index accepted = 0;
  Index drawn = 0;
};

/// Monte Carlo estimate of the second moment of rows conditioned on
/// max_t |a[t]|^2 <= mu (rejection sampling).
ConditionalMoment conditional_second_moment(const EnsembleSpec& spec, double mu, Index samples,
                                            Rng& rng);

}  // namespace ripless::ensembles
