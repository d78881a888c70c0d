#include "ripless/certificates.hpp"
#include "ripless/ensembles.hpp"
#include "ripless/harness.hpp"
#include "ripless/signal_ops.hpp"
#include "ripless/solvers.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

using namespace ripless;
using namespace ripless::solvers;

namespace {

RealMatrix gaussian(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  return ensembles::build_matrix(ensembles::EnsembleSpec::gaussian(n), m, rng).real();
}

RealMatrix random_orthonormal(Index n, Rng& rng) {
  RealMatrix B(n, n);
  for (Index i = 0; i < B.size(); ++i) B(i) = rng.normal();
  Eigen::HouseholderQR<RealMatrix> qr(B);
  return qr.householderQ();
}

RealVector soft_threshold(const RealVector& u, double tau) {
  return u.unaryExpr([tau](double v) { return v > tau ? v - tau : (v < -tau ? v + tau : 0.0); });
}

RealVector planted(Index n, Index s, Rng& rng) {
  return harness::plant_signal(n, s, harness::Amplitude::Rademacher, 1.0, 1.0, rng);
}

// min ||x||_1 s.t. |G x - c| <= b by enumerating vertices of the arrangement
// {x_i = 0} u {(G x - c)_j = +-b}; the piecewise-linear objective attains
// its minimum at one of them.
RealVector dantzig_by_vertices(const RealMatrix& G, const RealVector& c, double b) {
  const Index n = G.cols();
  std::vector<RealVector> normals;
  std::vector<double> offsets;
  for (Index i = 0; i < n; ++i) {
    normals.push_back(RealVector::Unit(n, i));
    offsets.push_back(0.0);
  }
  for (Index j = 0; j < n; ++j) {
    normals.push_back(G.row(j).transpose());
    offsets.push_back(c(j) + b);
    normals.push_back(G.row(j).transpose());
    offsets.push_back(c(j) - b);
  }
  const std::size_t H = normals.size();
  RealVector best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(H, false);
  std::fill(pick.begin(), pick.begin() + n, true);
  do {
    RealMatrix M(n, n);
    RealVector r(n);
    Index row = 0;
    for (std::size_t h = 0; h < H; ++h)
      if (pick[h]) {
        M.row(row) = normals[h].transpose();
        r(row++) = offsets[h];
      }
    Eigen::FullPivLU<RealMatrix> lu(M);
    if (!lu.isInvertible()) continue;
    const RealVector x = lu.solve(r);
    if (((G * x - c).cwiseAbs().array() > b + 1e-9).any()) continue;
    if (x.lpNorm<1>() < best_obj) {
      best_obj = x.lpNorm<1>();
      best = x;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST(BasisPursuit, ZeroMeasurements) {
  const RealMatrix A = gaussian(10, 20, 1);
  const SolverResult r = basis_pursuit(A, RealVector::Zero(10));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.x_hat.norm(), 1e-12);
}

TEST(BasisPursuit, SquareInvertibleSystem) {
  const RealMatrix A = gaussian(12, 12, 2);
  Rng rng(3);
  RealVector x(12);
  for (Index i = 0; i < 12; ++i) x(i) = rng.normal();
  const SolverResult r = basis_pursuit(A, A * x);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x_hat - x).norm(), 1e-8 * x.norm());
}

TEST(BasisPursuit, GaussianRecoveryRate) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const RealVector x = planted(64, 3, rng);
    const RealMatrix A = gaussian(40, 64, 1000 + seed);
    const RealVector y = A * x;
    const SolverResult r = basis_pursuit(A, y);
    EXPECT_LE((A * r.x_hat - y).norm(), 1e-9 * (1.0 + y.norm()));
    EXPECT_LE(r.x_hat.lpNorm<1>(), x.lpNorm<1>() + 1e-6);
    if (r.converged && (r.x_hat - x).norm() <= 1e-6) ++ok;
  }
  EXPECT_GE(ok, 90);
}

TEST(BasisPursuit, DualCertificateIsFeasibleAndTight) {
  Rng rng(4);
  const RealVector x = planted(50, 3, rng);
  const RealMatrix A = gaussian(30, 50, 5);
  const SolverResult r = basis_pursuit(A, A * x);
  ASSERT_TRUE(r.converged);
  ASSERT_EQ(r.dual.size(), 30);
  EXPECT_LE((A.transpose() * r.dual).lpNorm<Eigen::Infinity>(), 1.0 + 1e-9);
  EXPECT_NEAR(r.dual.dot(A * x), r.x_hat.lpNorm<1>(), 1e-7 * r.x_hat.lpNorm<1>());
}

TEST(BasisPursuit, ReportsInconsistentSystems) {
  RealMatrix A = RealMatrix::Zero(2, 3);
  A(0, 0) = 1;
  A(1, 0) = 1;
  const SolverResult r = basis_pursuit(A, (RealVector(2) << 1, 2).finished());
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.status, SolverStatus::Infeasible);
}

// Exhaustive l0 search against basis pursuit on small generic instances.
TEST(BasisPursuit, AgreesWithL0SearchWhenCertified) {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Index n = 10, m = 6, s = 2;
    Rng rng(seed + 500);
    const RealVector x = planted(n, s, rng);
    const RealMatrix A = gaussian(m, n, seed + 900);
    const RealVector y = A * x;
    int hits = 0;
    RealVector l0;
    for (Index k = 0; k <= m && hits == 0; ++k) {
      std::vector<bool> mask(static_cast<std::size_t>(n), false);
      std::fill(mask.begin(), mask.begin() + k, true);
      do {
        std::vector<Index> S;
        for (Index i = 0; i < n; ++i)
          if (mask[static_cast<std::size_t>(i)]) S.push_back(i);
        const RealMatrix AS = restrict(A, SupportSet(S, n));
        const RealVector c = k ? RealVector(AS.colPivHouseholderQr().solve(y)) : RealVector();
        if ((k ? (AS * c - y).norm() : y.norm()) <= 1e-9 * (1.0 + y.norm())) {
          ++hits;
          l0 = RealVector::Zero(n);
          for (Index j = 0; j < k; ++j) l0(S[static_cast<std::size_t>(j)]) = c(j);
        }
      } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    if (hits != 1) continue;
    const SolverResult r = basis_pursuit(A, y);
    if (!r.converged || r.dual.size() == 0) continue;
    const SupportSet T = SupportSet::of(Signal(l0));
    const RealVector v = A.transpose() * r.dual;
    const auto check = certificates::verify_exact_duality(v, A, T, l0);
    if (!check.pass) continue;
    ++compared;
    EXPECT_LT((r.x_hat - l0).norm(), 1e-6) << "seed " << seed;
  }
  EXPECT_GT(compared, 5);
}

TEST(Lasso, LargePenaltyGivesZero) {
  const RealMatrix A = gaussian(20, 30, 6);
  Rng rng(7);
  RealVector y(20);
  for (Index i = 0; i < 20; ++i) y(i) = rng.normal();
  const double top = (A.transpose() * y).lpNorm<Eigen::Infinity>();
  const SolverResult r = lasso(A, y, top);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.x_hat, RealVector::Zero(30));
  EXPECT_EQ(dantzig(A, y, top).x_hat.lpNorm<1>(), 0.0);
}

TEST(Lasso, OrthonormalDesignIsSoftThreshold) {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 3 + static_cast<Index>(rng.uniform_index(10));
    const RealMatrix Q = random_orthonormal(n, rng);
    RealVector y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.normal();
    const double tau = 0.5 * rng.uniform();
    const SolverResult r = lasso(Q, y, tau);
    ASSERT_TRUE(r.converged);
    EXPECT_LT((r.x_hat - soft_threshold(Q.transpose() * y, tau)).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(Lasso, SatisfiesKktConditions) {
  Rng rng(9);
  const RealVector x = planted(100, 5, rng);
  const RealMatrix A = gaussian(60, 100, 10);
  RealVector y = A * x;
  for (Index i = 0; i < 60; ++i) y(i) += 0.05 * rng.normal();
  const double penalty = 0.05;
  const SolverResult r = lasso(A, y, penalty);
  ASSERT_TRUE(r.converged);
  const RealVector g = A.transpose() * (y - A * r.x_hat);
  for (Index i = 0; i < 100; ++i) {
    EXPECT_LE(std::abs(g(i)), penalty + 1e-8);
    if (r.x_hat(i) != 0.0) {
      EXPECT_NEAR(g(i), penalty * (r.x_hat(i) > 0 ? 1.0 : -1.0), 1e-6);
    }
  }
}

TEST(Lasso, RestartObjectivesNonincreasing) {
  Rng rng(12);
  const RealVector x = planted(120, 6, rng);
  const RealMatrix A = gaussian(50, 120, 13);
  RealVector y = A * x;
  for (Index i = 0; i < 50; ++i) y(i) += 0.1 * rng.normal();
  SolverOptions opts;
  opts.polish = false;
  const SolverResult r = lasso(A, y, 0.02, opts);
  ASSERT_GE(r.restart_objectives.size(), 2u);
  for (std::size_t k = 1; k < r.restart_objectives.size(); ++k)
    EXPECT_LE(r.restart_objectives[k], r.restart_objectives[k - 1] + 1e-12);
}

TEST(Lasso, NoisyErrorScalesLikeTheory) {
  const Index n = 128, s = 4, m = 80;
  const double sigma = 0.1;
  const double lambda = default_lambda(n);
  double worst = 0.0;
  int tube_pass = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 77);
    const RealVector x = planted(n, s, rng);
    const RealMatrix A = gaussian(m, n, seed + 7700);
    const double sigma_m = sigma / std::sqrt(static_cast<double>(m));
    RealVector y = A * x;
    for (Index i = 0; i < m; ++i) y(i) += sigma_m * rng.normal();
    const SolverResult r = lasso(A, y, lambda * sigma_m);
    ASSERT_TRUE(r.converged) << "seed " << seed << " status " << to_string(r.status) << " it " << r.iterations;
    const double scale = sigma * std::sqrt(s * std::log(static_cast<double>(n)) / m);
    worst = std::max(worst, (r.x_hat - x).norm() / scale);
    if (tube_diagnostic(A, r.x_hat, x, lambda, sigma_m).pass) ++tube_pass;

    const SolverResult d = dantzig(A, y, lambda * sigma_m);
    ASSERT_TRUE(d.converged);
    EXPECT_LE((d.x_hat - x).norm(), 4.0 * (r.x_hat - x).norm() + 1e-9);
  }
  EXPECT_LE(worst, 20.0);
  EXPECT_GE(tube_pass, 95);
}

TEST(Dantzig, OrthonormalDesignMatchesLinearProgram) {
  Rng rng(14);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 3 + static_cast<Index>(rng.uniform_index(2));
    const RealMatrix Q = random_orthonormal(n, rng);
    RealVector y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.normal();
    const double b = 0.6 * rng.uniform();
    const SolverResult r = dantzig(Q, y, b);
    ASSERT_TRUE(r.converged);
    const RealVector lp = dantzig_by_vertices(Q.transpose() * Q, Q.transpose() * y, b);
    EXPECT_LT((r.x_hat - soft_threshold(Q.transpose() * y, b)).lpNorm<Eigen::Infinity>(), 1e-7);
    EXPECT_NEAR(r.x_hat.lpNorm<1>(), lp.lpNorm<1>(), 1e-7);
  }
}

TEST(Dantzig, GeneralDesignMatchesLinearProgram) {
  Rng rng(15);
  for (int rep = 0; rep < 30; ++rep) {
    RealMatrix A(6, 4);
    for (Index i = 0; i < A.size(); ++i) A(i) = rng.normal() / std::sqrt(6.0);
    RealVector y(6);
    for (Index i = 0; i < 6; ++i) y(i) = rng.normal();
    const double b = 0.3;
    const SolverResult r = dantzig(A, y, b);
    ASSERT_TRUE(r.converged);
    const RealMatrix G = A.transpose() * A;
    const RealVector lp = dantzig_by_vertices(G, A.transpose() * y, b);
    EXPECT_NEAR(r.x_hat.lpNorm<1>(), lp.lpNorm<1>(), 1e-7 * (1.0 + lp.lpNorm<1>()));
    EXPECT_LE((A.transpose() * (A * r.x_hat - y)).lpNorm<Eigen::Infinity>(), b + 1e-9);
  }
}

TEST(Dantzig, FeasibleTruthBoundsObjective) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 300);
    const RealVector x = planted(80, 4, rng);
    const RealMatrix A = gaussian(50, 80, seed + 3000);
    RealVector y = A * x;
    for (Index i = 0; i < 50; ++i) y(i) += 0.02 * rng.normal();
    const double b = (A.transpose() * (A * x - y)).lpNorm<Eigen::Infinity>() * 1.1;
    const SolverResult r = dantzig(A, y, b);
    ASSERT_TRUE(r.converged);
    EXPECT_LE((A.transpose() * (A * r.x_hat - y)).lpNorm<Eigen::Infinity>(), b + 1e-9);
    EXPECT_LE(r.x_hat.lpNorm<1>(), x.lpNorm<1>() + 1e-6);
  }
}

TEST(RecoveryProblem, DefaultsAndValidation) {
  const RealMatrix A = gaussian(5, 16, 20);
  const RecoveryProblem p(A, RealVector::Zero(5), 0.5);
  EXPECT_NEAR(p.effective_lambda(), 10.0 * std::sqrt(std::log(16.0)), 1e-12);
  EXPECT_NEAR(p.threshold(), 5.0 * std::sqrt(std::log(16.0)), 1e-12);
  EXPECT_THROW(RecoveryProblem(A, RealVector::Zero(4)), InvalidArgument);
  EXPECT_THROW(RecoveryProblem(A, RealVector::Zero(5), -1.0), InvalidArgument);
  EXPECT_EQ(program_from_string("dantzig"), Program::Dantzig);
  EXPECT_THROW(program_from_string("omp"), InvalidArgument);
}

TEST(ErrorBounds, ExactlySparseNoiseless) {
  ErrorBoundInputs in;
  in.s_bar = 3;
  in.m = 40;
  in.n = 64;
  in.sigma = 0.0;
  in.x = RealVector::Zero(64);
  in.x(3) = 2.0;
  in.x(9) = -1.0;
  EXPECT_EQ(l2_error_bound(in, Program::Lasso), 0.0);
  EXPECT_EQ(l1_error_bound(in, Program::Dantzig), 0.0);
  EXPECT_THROW(l2_error_bound(in, Program::BasisPursuit), InvalidArgument);
}

TEST(ErrorBounds, HandEvaluatedValues) {
  const double ln16 = std::log(16.0);
  ErrorBoundInputs in;
  in.s_bar = 1;
  in.m = 16;
  in.n = 16;
  in.sigma = 1.0;
  in.beta = 1.0;
  in.x = RealVector::Zero(16);
  in.x(0) = 1.0;
  const double a = std::sqrt(2.0 * std::pow(ln16, 5) / 16.0);
  EXPECT_NEAR(alpha(1, 16, 16, 1.0), a, 1e-12);
  EXPECT_NEAR(l2_error_bound(in, Program::Lasso), (1.0 + a) * std::sqrt(ln16 / 16.0), 1e-12);
  EXPECT_NEAR(l2_error_bound(in, Program::Dantzig), (1.0 + a * a) * std::sqrt(ln16 / 16.0), 1e-12);

  // s_bar = 2, n = 64, m = 32, x with entries (3, 0.5): min over s of
  // C(1 + alpha_s)[||x - x_s||_1 + s sigma sqrt(log n / m)].
  const double ln64 = std::log(64.0);
  ErrorBoundInputs in2;
  in2.s_bar = 2;
  in2.m = 32;
  in2.n = 64;
  in2.sigma = 1.0;
  in2.beta = 1.0;
  in2.x = RealVector::Zero(64);
  in2.x(5) = 3.0;
  in2.x(7) = 0.5;
  const double a1 = std::sqrt(2.0 * std::pow(ln64, 5) / 32.0);
  const double a2 = std::sqrt(2.0 * 2.0 * std::pow(ln64, 5) / 32.0);
  const double t1 = (1.0 + a1) * (0.5 + std::sqrt(ln64 / 32.0));
  const double t2 = (1.0 + a2) * (2.0 * std::sqrt(ln64 / 32.0));
  EXPECT_NEAR(l1_error_bound(in2, Program::Lasso), std::min(t1, t2), 1e-12);
}

TEST(ErrorBounds, AlphaAtMostLogSquared) {
  for (Index n : {16, 64, 256, 1024})
    for (Index s : {1, 3, 8}) {
      const double beta = 1.5;
      const Index m = static_cast<Index>(std::ceil((1.0 + beta) * s * std::log(static_cast<double>(n))));
      EXPECT_LE(alpha(s, m, n, beta), std::pow(std::log(static_cast<double>(n)), 2) + 1e-12);
    }
}

TEST(ErrorBounds, L1DominatesL2) {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    ErrorBoundInputs in;
    in.n = 32;
    in.m = 10 + static_cast<Index>(rng.uniform_index(100));
    in.s_bar = 1 + static_cast<Index>(rng.uniform_index(6));
    in.sigma = rng.uniform();
    in.x = RealVector(32);
    for (Index i = 0; i < 32; ++i) in.x(i) = rng.normal() * std::pow(0.7, static_cast<double>(i));
    EXPECT_GE(l1_error_bound(in, Program::Lasso), l2_error_bound(in, Program::Lasso) - 1e-12);
    in.s_bar = 1;  // single term: l1 = sqrt(1) * l2
    EXPECT_NEAR(l1_error_bound(in, Program::Dantzig), l2_error_bound(in, Program::Dantzig), 1e-12);
  }
}

TEST(TubeDiagnostic, Examples) {
  const RealMatrix A = gaussian(20, 40, 22);
  Rng rng(23);
  RealVector x(40);
  for (Index i = 0; i < 40; ++i) x(i) = rng.normal();
  const TubeDiagnostic same = tube_diagnostic(A, x, x, 10.0, 0.1);
  EXPECT_EQ(same.value, 0.0);
  EXPECT_TRUE(same.pass);
  EXPECT_NEAR(same.threshold, 1.25, 1e-12);
  RealVector far = x;
  for (Index i = 0; i < 40; ++i) far(i) += 50.0 * rng.normal();
  EXPECT_FALSE(tube_diagnostic(A, far, x, 10.0, 0.1).pass);
}
