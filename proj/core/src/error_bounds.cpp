#include "ripless/signal_ops.hpp"
#include "ripless/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ripless::solvers {

double alpha(Index s, Index m, Index n, double beta) {
  if (s < 1 || m < 1 || n < 1) throw InvalidArgument("alpha: s, m, n must be >= 1");
  if (!(beta > 0.0)) throw InvalidArgument("alpha: beta must be > 0");
  const double logn = std::log(static_cast<double>(n));
  return std::sqrt((1.0 + beta) * static_cast<double>(s) * std::pow(logn, 5) / static_cast<double>(m));
}

namespace {

void validate(const ErrorBoundInputs& in) {
  if (in.s_bar < 1 || in.s_bar > in.n) throw InvalidArgument("error bound: need 1 <= s_bar <= n");
  if (in.m < 1) throw InvalidArgument("error bound: m must be >= 1");
  if (in.x.size() != in.n) throw InvalidArgument("error bound: x must have length n");
  if (!(in.sigma >= 0.0)) throw InvalidArgument("error bound: sigma must be >= 0");
  if (!(in.beta > 0.0)) throw InvalidArgument("error bound: beta must be > 0");
}

double tail_l1(const RealVector& x, Index s) {
  const Signal xs = best_s_approx(Signal(x), s);
  return (x - xs.entries()).lpNorm<1>();
}

template <typename Bracket>
double minimize_over_s(const ErrorBoundInputs& in, Program program, Bracket bracket) {
  if (program == Program::BasisPursuit) throw InvalidArgument("error bounds are defined for lasso and dantzig");
  validate(in);
  double best = std::numeric_limits<double>::infinity();
  for (Index s = 1; s <= in.s_bar; ++s) {
    const double a = alpha(s, in.m, in.n, in.beta);
    const double factor = 1.0 + (program == Program::Dantzig ? a * a : a);
    best = std::min(best, in.constant * factor * bracket(s));
  }
  return best;
}

}  // namespace

double l2_error_bound(const ErrorBoundInputs& in, Program program) {
  const double logn = std::log(static_cast<double>(in.n));
  return minimize_over_s(in, program, [&](Index s) {
    const double sd = static_cast<double>(s);
    return tail_l1(in.x, s) / std::sqrt(sd) + in.sigma * std::sqrt(sd * logn / static_cast<double>(in.m));
  });
}

double l1_error_bound(const ErrorBoundInputs& in, Program program) {
  const double logn = std::log(static_cast<double>(in.n));
  return minimize_over_s(in, program, [&](Index s) {
    const double sd = static_cast<double>(s);
    return tail_l1(in.x, s) + sd * in.sigma * std::sqrt(logn / static_cast<double>(in.m));
  });
}

}  // namespace ripless::solvers
