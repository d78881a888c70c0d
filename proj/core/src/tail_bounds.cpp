#include "ripless/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace ripless::estimates {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double matrix_bernstein_tail(double d, double B, double sigma_sq, double t) {
  if (!(d >= 1.0) || !(B > 0.0) || !(sigma_sq > 0.0) || !(t >= 0.0))
    throw InvalidArgument("matrix_bernstein_tail: need d >= 1, B > 0, sigma^2 > 0, t >= 0");
  return clamp01(2.0 * d * std::exp(-(t * t / 2.0) / (sigma_sq + B * t / 3.0)));
}

double vector_bernstein_tail(double sigma_sq, double t) {
  if (!(sigma_sq > 0.0) || !(t >= 0.0)) throw InvalidArgument("vector_bernstein_tail: need sigma^2 > 0, t >= 0");
  return clamp01(std::exp(-t * t / (8.0 * sigma_sq) + 0.25));
}

std::string to_string(Estimate which) {
  switch (which) {
    case Estimate::E1: return "e1";
    case Estimate::E2: return "e2";
    case Estimate::E3: return "e3";
    case Estimate::E4: return "e4";
  }
  return "unknown";
}

Estimate estimate_from_string(const std::string& name) {
  if (name == "e1") return Estimate::E1;
  if (name == "e2") return Estimate::E2;
  if (name == "e3") return Estimate::E3;
  if (name == "e4") return Estimate::E4;
  throw InvalidArgument("unknown estimate '" + name + "' (expected e1|e2|e3|e4)");
}

void TailBoundQuery::validate() const {
  if (m < 1 || s < 1 || n < 1) throw InvalidArgument("tail bound: m, s, n must be >= 1");
  if (s > n) throw InvalidArgument("tail bound: s must not exceed n");
  if (!(mu >= 1.0)) throw InvalidArgument("tail bound: mu must be >= 1");
  if (!(level >= 0.0) || !std::isfinite(level)) throw InvalidArgument("tail bound: level must be >= 0");
}

TailBound e1_tail(const TailBoundQuery& q) {
  q.validate();
  const double ratio = static_cast<double>(q.m) / (q.mu * static_cast<double>(q.s));
  const double d = q.level;
  return {clamp01(2.0 * static_cast<double>(q.s) * std::exp(-ratio * d * d / (2.0 * (1.0 + d / 3.0)))), true};
}

TailBound e2_tail(const TailBoundQuery& q) {
  q.validate();
  const double x = q.level * std::sqrt(static_cast<double>(q.m) / (q.mu * static_cast<double>(q.s)));
  const double value = x < 1.0 ? 1.0 : clamp01(std::exp(-0.25 * (x - 1.0) * (x - 1.0)));
  return {value, q.level <= 0.5};
}

TailBound e3_tail(const TailBoundQuery& q) {
  q.validate();
  const double t = q.level;
  const double expo = -(static_cast<double>(q.m) / (2.0 * q.mu)) * t * t /
                      (1.0 + std::sqrt(static_cast<double>(q.s)) * t / 3.0);
  return {clamp01(2.0 * static_cast<double>(q.n) * std::exp(expo)), true};
}

TailBound e4_tail(const TailBoundQuery& q) {
  q.validate();
  const double t = q.level;
  const double expo = -static_cast<double>(q.m) * t * t / (8.0 * q.mu * static_cast<double>(q.s)) + 0.25;
  return {clamp01(static_cast<double>(q.n) * std::exp(expo)), t <= std::sqrt(static_cast<double>(q.s))};
}

TailBound tail(const TailBoundQuery& q) {
  switch (q.which) {
    case Estimate::E1: return e1_tail(q);
    case Estimate::E2: return e2_tail(q);
    case Estimate::E3: return e3_tail(q);
    case Estimate::E4: return e4_tail(q);
  }
  throw InvalidArgument("unknown estimate");
}

}  // namespace ripless::estimates
