#include "ripless/solvers.hpp"

#include "ripless/linalg.hpp"
#include "ripless/signal_ops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ripless::solvers {

std::string to_string(Program program) {
  switch (program) {
    case Program::BasisPursuit: return "bp";
    case Program::Lasso: return "lasso";
    case Program::Dantzig: return "dantzig";
  }
  return "unknown";
}

Program program_from_string(const std::string& name) {
  if (name == "bp") return Program::BasisPursuit;
  if (name == "lasso") return Program::Lasso;
  if (name == "dantzig") return Program::Dantzig;
  throw InvalidArgument("unknown program '" + name + "' (expected bp|lasso|dantzig)");
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double default_lambda(Index n) { return 10.0 * std::sqrt(std::log(static_cast<double>(n))); }

namespace {

RealVector soft_threshold(const RealVector& v, double tau) {
  return v.unaryExpr([tau](double t) { return t > tau ? t - tau : (t < -tau ? t + tau : 0.0); });
}

std::vector<Index> nonzeros(const RealVector& v, double relative = 1e-10) {
  std::vector<Index> idx;
  const double scale = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return idx;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > relative * scale) idx.push_back(i);
  return idx;
}

RealVector scatter(const RealVector& values, const std::vector<Index>& idx, Index n) {
  RealVector out = RealVector::Zero(n);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = values[static_cast<Index>(k)];
  return out;
}

bool all_nonzero(const RealVector& v) { return (v.array() != 0.0).all(); }

double inf_norm(const RealVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void check_dimensions(const RealMatrix& A, const RealVector& y) {
  if (A.rows() != y.size()) throw InvalidArgument("solver: y length must equal rows of A");
  if (A.cols() < 1) throw InvalidArgument("solver: A must have at least one column");
  if (!A.allFinite() || !y.allFinite()) throw InvalidArgument("solver: non-finite input");
}

// ---------------------------------------------------------------- basis pursuit

struct BpCandidate {
  RealVector x;
  RealVector w;
  double gap = 0.0;
};

double bp_gap(const RealVector& x, const RealVector& y, const RealMatrix& A, RealVector& w) {
  const double scale = std::max(1.0, inf_norm(A.transpose() * w));
  w /= scale;
  const double primal = x.lpNorm<1>();
  return (primal - y.dot(w)) / std::max(1.0, primal);
}

std::optional<BpCandidate> polish_bp(const RealMatrix& A, const RealVector& y,
                                     const std::vector<Index>& support, double feas_tol) {
  const Index n = A.cols();
  const auto s = static_cast<Index>(support.size());
  if (s == 0) {
    if (y.norm() > feas_tol) return std::nullopt;
    return BpCandidate{RealVector::Zero(n), RealVector::Zero(A.rows()), 0.0};
  }
  if (s > A.rows()) return std::nullopt;
  const RealMatrix AS = A(Eigen::all, support);
  Eigen::ColPivHouseholderQR<RealMatrix> qr(AS);
  if (qr.rank() < s) return std::nullopt;
  const RealVector xS = qr.solve(y);
  if ((AS * xS - y).norm() > feas_tol || !all_nonzero(xS)) return std::nullopt;
  const RealVector signs = sgn(xS);
  RealVector w = AS * (AS.transpose() * AS).ldlt().solve(signs);
  BpCandidate out{scatter(xS, support, n), std::move(w), 0.0};
  out.gap = bp_gap(out.x, y, A, out.w);
  return out;
}

// ---------------------------------------------------------------- lasso

double lasso_objective(const RealMatrix& A, const RealVector& y, const RealVector& x, double penalty) {
  return 0.5 * (A * x - y).squaredNorm() + penalty * x.lpNorm<1>();
}

double lasso_kkt(const RealMatrix& A, const RealVector& y, const RealVector& x, double penalty) {
  const RealVector g = A.transpose() * (y - A * x);
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double v = x[i] != 0.0 ? std::abs(g[i] - penalty * (x[i] > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g[i]) - penalty);
    worst = std::max(worst, v);
  }
  return worst;
}

std::optional<RealVector> polish_lasso(const RealMatrix& A, const RealVector& y, const RealVector& x,
                                       double penalty) {
  std::vector<Index> support;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) support.push_back(i);
  if (support.empty() || static_cast<Index>(support.size()) > A.rows()) return std::nullopt;
  const RealMatrix AS = A(Eigen::all, support);
  const RealVector signs = sgn(RealVector(x(support)));
  Eigen::LDLT<RealMatrix> ldlt(AS.transpose() * AS);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const RealVector xS = ldlt.solve(AS.transpose() * y - penalty * signs);
  if (!xS.allFinite() || sgn(xS) != signs) return std::nullopt;
  return scatter(xS, support, x.size());
}

// ---------------------------------------------------------------- dantzig

struct DsDual {
  RealVector w;
  double value = 0.0;
};

DsDual dantzig_dual(const RealMatrix& G, const RealVector& b, RealVector w, double bound) {
  const double scale = std::max(1.0, inf_norm(G * w));
  w /= scale;
  const double value = b.dot(w) - bound * w.lpNorm<1>();
  return {std::move(w), value};
}

struct DsCandidate {
  RealVector x;
  DsDual dual;
  double gap = 0.0;
};

std::optional<DsCandidate> polish_dantzig(const RealMatrix& G, const RealVector& b,
                                          const RealVector& z, double bound, double feas_tol) {
  const Index n = G.rows();
  const std::vector<Index> support = nonzeros(z);
  const auto s = static_cast<Index>(support.size());
  if (s == 0) return std::nullopt;
  const RealVector c = G * z - b;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return std::abs(c[i]) > std::abs(c[j]); });
  std::vector<Index> active(order.begin(), order.begin() + s);
  std::sort(active.begin(), active.end());

  RealVector rhs(s);
  for (Index k = 0; k < s; ++k) {
    const Index j = active[static_cast<std::size_t>(k)];
    rhs[k] = b[j] + bound * (c[j] >= 0.0 ? 1.0 : -1.0);
  }
  Eigen::FullPivLU<RealMatrix> lu(G(active, support));
  if (!lu.isInvertible()) return std::nullopt;
  const RealVector xS = lu.solve(rhs);
  if (!xS.allFinite() || !all_nonzero(xS)) return std::nullopt;
  RealVector x = scatter(xS, support, n);
  if (inf_norm(G * x - b) > bound + feas_tol) return std::nullopt;

  Eigen::FullPivLU<RealMatrix> lu_t(G(support, active));
  if (!lu_t.isInvertible()) return std::nullopt;
  const RealVector wJ = lu_t.solve(sgn(xS));
  DsCandidate out{std::move(x), dantzig_dual(G, b, scatter(wJ, active, n), bound), 0.0};
  const double primal = out.x.lpNorm<1>();
  out.gap = (primal - out.dual.value) / std::max(1.0, primal);
  return out;
}

void finish(SolverResult& r, const RealMatrix& A, const RealVector& y) {
  r.tube_value = inf_norm(A.transpose() * (A * r.x_hat - y));
}

}  // namespace

SolverResult basis_pursuit(const RealMatrix& A, const RealVector& y, const SolverOptions& opts) {
  check_dimensions(A, y);
  const Index n = A.cols();
  const double feas_tol = opts.abs_tol * (1.0 + y.norm());
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  SolverResult result;

  const linalg::RowSpace rows(A);
  RealVector x = rows.solve(y);
  if ((A * x - y).norm() > 1e-6 * (1.0 + y.norm())) {
    result.x_hat = x;
    result.status = SolverStatus::Infeasible;
    result.primal_residual = (A * x - y).norm();
    result.objective = x.lpNorm<1>();
    finish(result, A, y);
    return result;
  }

  auto accept = [&](BpCandidate c, int iterations, bool polished) {
    result.x_hat = std::move(c.x);
    result.dual = std::move(c.w);
    result.iterations = iterations;
    result.kkt_residual = std::max(0.0, c.gap);
    result.objective = result.x_hat.lpNorm<1>();
    result.dual_objective = y.dot(result.dual);
    result.primal_residual = (A * result.x_hat - y).norm();
    result.polished = polished;
    result.converged = result.primal_residual <= feas_tol && result.kkt_residual <= opts.rel_tol;
    result.status = result.converged ? SolverStatus::Optimal : SolverStatus::MaxIterations;
    finish(result, A, y);
    return result;
  };

  constexpr double kRelax = 1.5;
  double rho = 1.0;
  RealVector z = soft_threshold(x, 1.0 / rho);
  RealVector u = RealVector::Zero(n);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = rows.project_affine(z - u, y);
    const RealVector xh = kRelax * x + (1.0 - kRelax) * z;
    const RealVector z_old = z;
    z = soft_threshold(xh + u, 1.0 / rho);
    u += xh - z;

    const double r = (x - z).norm();
    const double s = rho * (z - z_old).norm();
    const double eps_pri = opts.abs_tol * sqrt_n + opts.rel_tol * std::max(x.norm(), z.norm());
    const double eps_dual = opts.abs_tol * sqrt_n + opts.rel_tol * rho * u.norm();
    const bool small_residuals = r <= eps_pri && s <= eps_dual;

    if (opts.polish && (it % opts.polish_interval == 0 || small_residuals)) {
      if (auto c = polish_bp(A, y, nonzeros(z), feas_tol); c && c->gap <= opts.rel_tol)
        return accept(std::move(*c), it, true);
    }
    if (small_residuals || it == opts.max_iterations) {
      RealVector w = rows.solve_transpose(rho * u);
      const double gap = bp_gap(x, y, A, w);
      if (gap <= opts.rel_tol || it == opts.max_iterations)
        return accept(BpCandidate{x, std::move(w), gap}, it, false);
    }
    if (it % 10 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        u /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }
  return result;  // unreachable: the final iteration always returns
}

SolverResult lasso(const RealMatrix& A, const RealVector& y, double penalty, const SolverOptions& opts) {
  check_dimensions(A, y);
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw InvalidArgument("lasso: penalty must be >= 0");
  const Index n = A.cols();
  const RealVector Aty = A.transpose() * y;
  const double kkt_tol = opts.abs_tol * (1.0 + inf_norm(Aty));
  SolverResult result;

  auto accept = [&](RealVector x, int iterations, bool polished) {
    result.x_hat = std::move(x);
    result.iterations = iterations;
    result.kkt_residual = lasso_kkt(A, y, result.x_hat, penalty);
    result.objective = lasso_objective(A, y, result.x_hat, penalty);
    result.polished = polished;
    result.converged = result.kkt_residual <= kkt_tol;
    result.status = result.converged ? SolverStatus::Optimal : SolverStatus::MaxIterations;
    finish(result, A, y);
    return result;
  };

  if (penalty >= inf_norm(Aty)) return accept(RealVector::Zero(n), 0, false);

  const double lipschitz = std::pow(operator_norm(A), 2);
  const double step = 1.0 / lipschitz;
  RealVector x = RealVector::Zero(n);
  RealVector v = x;
  double t = 1.0;
  double f = lasso_objective(A, y, x, penalty);
  result.restart_objectives.push_back(f);

  auto finalize = [&](int it) -> std::optional<SolverResult> {
    if (opts.polish) {
      if (auto p = polish_lasso(A, y, x, penalty); p && lasso_kkt(A, y, *p, penalty) <= kkt_tol)
        return accept(std::move(*p), it, true);
    }
    if (lasso_kkt(A, y, x, penalty) <= kkt_tol || it == opts.max_iterations) return accept(x, it, false);
    return std::nullopt;
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const RealVector grad = A.transpose() * (A * v - y);
    RealVector x_next = soft_threshold(v - step * grad, step * penalty);
    const double f_next = lasso_objective(A, y, x_next, penalty);
    if (f_next > f) {
      // A plain step from x that does not descend means x is stationary to
      // rounding; otherwise momentum overshot and we restart from x.
      if (t == 1.0) {
        if (auto done = finalize(it)) return *done;
        return accept(x, it, false);
      }
      result.restart_objectives.push_back(f);
      t = 1.0;
      v = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    f = f_next;
    t = t_next;

    if (it % opts.polish_interval == 0 || it == opts.max_iterations)
      if (auto done = finalize(it)) return *done;
  }
  return accept(x, opts.max_iterations, false);
}

SolverResult dantzig(const RealMatrix& A, const RealVector& y, double bound, const SolverOptions& opts) {
  check_dimensions(A, y);
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw InvalidArgument("dantzig: bound must be >= 0");
  const Index n = A.cols();
  const RealMatrix G = A.transpose() * A;
  const RealVector b = A.transpose() * y;
  const double feas_tol = opts.abs_tol;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  SolverResult result;

  auto accept = [&](RealVector x, DsDual dual, int iterations, bool polished) {
    result.x_hat = std::move(x);
    result.iterations = iterations;
    result.objective = result.x_hat.lpNorm<1>();
    result.dual = std::move(dual.w);
    result.dual_objective = dual.value;
    result.kkt_residual = std::max(0.0, (result.objective - dual.value) / std::max(1.0, result.objective));
    result.primal_residual = std::max(0.0, inf_norm(G * result.x_hat - b) - bound);
    result.polished = polished;
    result.converged = result.primal_residual <= feas_tol && result.kkt_residual <= opts.rel_tol;
    result.status = result.converged ? SolverStatus::Optimal : SolverStatus::MaxIterations;
    finish(result, A, y);
    return result;
  };

  if (bound >= inf_norm(b)) return accept(RealVector::Zero(n), DsDual{RealVector::Zero(n), 0.0}, 0, false);

  // (I + G^2)^{-1} via the eigendecomposition of G.
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(G);
  const RealVector inv = (1.0 + eig.eigenvalues().array().square()).inverse();
  const RealMatrix solve_op = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();

  double rho = 1.0;
  RealVector x = RealVector::Zero(n), z = x, u = RealVector::Zero(n), p = x, q = u;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = solve_op * ((z - p) + G * (u + b - q));
    const RealVector Gx = G * x;
    const RealVector z_old = z, u_old = u;
    z = soft_threshold(x + p, 1.0 / rho);
    u = (Gx - b + q).cwiseMax(-bound).cwiseMin(bound);
    p += x - z;
    q += Gx - u - b;

    const double r = std::sqrt((x - z).squaredNorm() + (Gx - u - b).squaredNorm());
    const double s = rho * ((z - z_old) + G * (u - u_old)).norm();
    const double eps_pri = opts.abs_tol * sqrt_n + opts.rel_tol * std::max({x.norm(), z.norm(), u.norm() + b.norm()});
    const double eps_dual = opts.abs_tol * sqrt_n + opts.rel_tol * rho * (p + G * q).norm();
    const bool small_residuals = r <= eps_pri && s <= eps_dual;

    if (opts.polish && (it % opts.polish_interval == 0 || small_residuals)) {
      if (auto c = polish_dantzig(G, b, z, bound, feas_tol); c && c->gap <= opts.rel_tol)
        return accept(std::move(c->x), std::move(c->dual), it, true);
    }
    if (small_residuals || it == opts.max_iterations) {
      DsDual d1 = dantzig_dual(G, b, -rho * q, bound);
      DsDual d2 = dantzig_dual(G, b, rho * q, bound);
      DsDual& best = d1.value >= d2.value ? d1 : d2;
      const double primal = x.lpNorm<1>();
      const double gap = (primal - best.value) / std::max(1.0, primal);
      const double violation = std::max(0.0, inf_norm(Gx - b) - bound);
      if ((gap <= opts.rel_tol && violation <= feas_tol) || it == opts.max_iterations)
        return accept(x, std::move(best), it, false);
    }
    if (it % 10 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        p /= 2.0;
        q /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        p *= 2.0;
        q *= 2.0;
      }
    }
  }
  return result;
}

RecoveryProblem::RecoveryProblem(RealMatrix A_, RealVector y_, double sigma_m_, std::optional<double> lambda_)
    : A(std::move(A_)), y(std::move(y_)), sigma_m(sigma_m_), lambda(lambda_) {
  check_dimensions(A, y);
  if (!(sigma_m >= 0.0)) throw InvalidArgument("RecoveryProblem: sigma_m must be >= 0");
  if (lambda && !(*lambda >= 0.0)) throw InvalidArgument("RecoveryProblem: lambda must be >= 0");
}

RecoveryProblem RecoveryProblem::from_measurements(const MeasurementMatrix& A, const MeasurementVector& y,
                                                   std::optional<double> lambda) {
  auto [Ar, yr] = real_system(A, y);
  return RecoveryProblem(std::move(Ar), std::move(yr), y.sigma_m(), lambda);
}

double RecoveryProblem::effective_lambda() const { return lambda ? *lambda : default_lambda(A.cols()); }

SolverResult solve(const RecoveryProblem& problem, Program program, const SolverOptions& opts) {
  switch (program) {
    case Program::BasisPursuit: return basis_pursuit(problem.A, problem.y, opts);
    case Program::Lasso: return lasso(problem.A, problem.y, problem.threshold(), opts);
    case Program::Dantzig: return dantzig(problem.A, problem.y, problem.threshold(), opts);
  }
  throw InvalidArgument("unknown program");
}

TubeDiagnostic tube_diagnostic(const RealMatrix& A, const RealVector& x_hat, const RealVector& x,
                               double lambda, double sigma_m) {
  if (x_hat.size() != A.cols() || x.size() != A.cols())
    throw InvalidArgument("tube_diagnostic: dimension mismatch");
  TubeDiagnostic d;
  d.value = inf_norm(A.transpose() * (A * (x_hat - x)));
  d.threshold = 1.25 * lambda * sigma_m;
  d.pass = d.value <= d.threshold;
  return d;
}

}  // namespace ripless::solvers
