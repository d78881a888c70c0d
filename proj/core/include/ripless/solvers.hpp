#pragma once

#include "ripless/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ripless::solvers {

enum class Program { BasisPursuit, Lasso, Dantzig };

std::string to_string(Program program);
Program program_from_string(const std::string& name);

/// Default regularization level 10 sqrt(log n).
double default_lambda(Index n);

struct SolverOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  int max_iterations = 100000;
  /// Periodically re-solve on the current support and accept the result
  /// when it comes with a dual certificate closing the gap.
  bool polish = true;
  int polish_interval = 20;
};

enum class SolverStatus { Optimal, MaxIterations, Infeasible };

std::string to_string(SolverStatus status);

struct SolverResult {
  RealVector x_hat;
  int iterations = 0;
  /// Program-specific optimality residual: relative duality gap for basis
  /// pursuit and Dantzig, worst subgradient violation for the LASSO.
  double kkt_residual = 0.0;
  /// ||A^T (A x_hat - y)||_inf.
  double tube_value = 0.0;
  double objective = 0.0;
  /// Constraint violation: ||A x_hat - y||_2 for basis pursuit,
  /// max(0, ||A^T(A x_hat - y)||_inf - bound) for Dantzig, 0 for the LASSO.
  double primal_residual = 0.0;
  double dual_objective = 0.0;
  bool converged = false;
  bool polished = false;
  SolverStatus status = SolverStatus::MaxIterations;
  /// LASSO objective recorded at every momentum restart (nonincreasing).
  std::vector<double> restart_objectives;
  /// Dual certificate: w with ||A^T w||_inf <= 1 (basis pursuit), or w with
  /// ||A^T A w||_inf <= 1 (Dantzig). Empty for the LASSO.
  RealVector dual;
};

/// min ||x||_1 subject to A x = y (ADMM with exact affine projection).
SolverResult basis_pursuit(const RealMatrix& A, const RealVector& y, const SolverOptions& opts = {});

/// min 1/2 ||A x - y||^2 + penalty ||x||_1 (FISTA, function-value restart,
/// step 1/||A||^2). `penalty` is lambda * sigma_m.
SolverResult lasso(const RealMatrix& A, const RealVector& y, double penalty,
                   const SolverOptions& opts = {});

/// min ||x||_1 subject to ||A^T (A x - y)||_inf <= bound (ADMM on the split
/// x = z, A^T A x - u = A^T y with u boxed). `bound` is lambda * sigma_m.
SolverResult dantzig(const RealMatrix& A, const RealVector& y, double bound,
                     const SolverOptions& opts = {});

/// (A, y, sigma_m, lambda) instance of y = A x + sigma_m z over the reals.
struct RecoveryProblem {
  RealMatrix A;
  RealVector y;
  double sigma_m = 0.0;
  std::optional<double> lambda;

  RecoveryProblem(RealMatrix A, RealVector y, double sigma_m = 0.0,
                  std::optional<double> lambda = std::nullopt);
  static RecoveryProblem from_measurements(const MeasurementMatrix& A, const MeasurementVector& y,
                                           std::optional<double> lambda = std::nullopt);

  double effective_lambda() const;
  double threshold() const { return effective_lambda() * sigma_m; }
};

SolverResult solve(const RecoveryProblem& problem, Program program, const SolverOptions& opts = {});

/// Inputs of the LASSO / Dantzig error-bound formulas. The minimum runs over
/// 1 <= s <= s_bar; `constant` stands in for the unnamed numerical constant.
struct ErrorBoundInputs {
  Index s_bar = 1;
  Index m = 1;
  Index n = 1;
  double sigma = 0.0;
  double beta = 1.0;
  RealVector x;
  double constant = 1.0;
};

/// alpha = sqrt((1 + beta) s log^5 n / m).
double alpha(Index s, Index m, Index n, double beta);

double l2_error_bound(const ErrorBoundInputs& inputs, Program program);
double l1_error_bound(const ErrorBoundInputs& inputs, Program program);

struct TubeDiagnostic {
  double value = 0.0;      // ||A^T A (x_hat - x)||_inf
  double threshold = 0.0;  // (5/4) lambda sigma_m
  bool pass = false;
};

TubeDiagnostic tube_diagnostic(const RealMatrix& A, const RealVector& x_hat, const RealVector& x,
                               double lambda, double sigma_m);

}  // namespace ripless::solvers
