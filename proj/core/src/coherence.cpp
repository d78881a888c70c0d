#include "ripless/ensembles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace ripless::ensembles {

namespace {

constexpr double kMuLow = 1.0;
constexpr double kMuHigh = 1e6;
constexpr double kBisectionRelTol = 1e-6;

// P(Z >= x) for standard normal Z; erfc keeps precision deep in the tail.
double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_density(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double tail_integral(const std::function<double(double)>& f, double from) {
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, from, std::numeric_limits<double>::infinity(), 20, 1e-12, &error);
  return value;
}

}  // namespace

CoherenceReport deterministic_coherence(const EnsembleSpec& spec) {
  CoherenceReport report;
  report.mode = CoherenceMode::Deterministic;
  switch (spec.family()) {
    case Family::Gaussian:
      throw UnsupportedFamily("deterministic_coherence: Gaussian rows are unbounded; use stochastic_coherence");
    case Family::Binary:
    case Family::SubsampledDFT:
    case Family::ContinuousFourier:
      report.mu = 1.0;
      break;
    case Family::CoordinateSampling:
      report.mu = static_cast<double>(spec.n());
      break;
    case Family::SubsampledOrthogonal:
      report.mu = spec.orthogonal().cwiseAbs2().maxCoeff();
      break;
    case Family::RandomConvolution:
      report.mu = spec.filter().cwiseAbs2().maxCoeff();
      break;
  }
  return report;
}

TailModel gaussian_tail_model(Index n) {
  const double dn = static_cast<double>(n);
  TailModel model;
  model.tail = [dn](double t) {
    if (t <= 0.0) return 1.0;
    return std::min(1.0, 2.0 * dn * normal_upper_tail(std::sqrt(t)));
  };
  model.excess_moment = [dn](double mu) {
    const double r = std::sqrt(mu);
    return dn * (2.0 * dn * normal_upper_tail(r) + 2.0 * r * normal_density(r));
  };
  return model;
}

std::pair<double, double> stochastic_conditions(Index n, double mu, const TailModel& model) {
  if (!model.tail) throw InvalidArgument("stochastic_coherence: tail function required");
  const double dn = static_cast<double>(n);
  const double tail = model.tail(mu);
  double excess;
  if (model.excess_moment) {
    excess = model.excess_moment(mu);
  } else {
    excess = dn * mu * tail + dn * tail_integral(model.tail, mu);
  }
  return {excess / dn, tail};
}

CoherenceReport stochastic_coherence(const EnsembleSpec& spec, Index m, const TailModel& model) {
  if (m < 1) throw InvalidArgument("stochastic_coherence: m must be >= 1");
  const Index n = spec.n();
  const double dn = static_cast<double>(n);
  const double excess_threshold = (1.0 / 20.0) * std::pow(dn, -1.5);
  const double tail_threshold = 1.0 / (dn * static_cast<double>(m));

  auto holds = [&](double mu) {
    auto [excess, tail] = stochastic_conditions(n, mu, model);
    return excess <= excess_threshold && tail <= tail_threshold;
  };

  double lo = kMuLow, hi = kMuHigh;
  if (!holds(hi))
    throw NoValidCoherence("stochastic_coherence: tail does not decay fast enough for any mu <= 1e6");
  if (holds(lo)) {
    hi = lo;
  } else {
    while (hi - lo > kBisectionRelTol * hi) {
      const double mid = 0.5 * (lo + hi);
      (holds(mid) ? hi : lo) = mid;
    }
  }

  CoherenceReport report;
  report.mode = CoherenceMode::Stochastic;
  report.mu = hi;
  auto [excess, tail] = stochastic_conditions(n, hi, model);
  report.excess_moment = excess;
  report.excess_threshold = excess_threshold;
  report.tail_probability = tail;
  report.tail_threshold = tail_threshold;
  return report;
}

}  // namespace ripless::ensembles
