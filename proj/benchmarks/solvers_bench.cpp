#include "ripless/certificates.hpp"
#include "ripless/ensembles.hpp"
#include "ripless/harness.hpp"
#include "ripless/linalg.hpp"
#include "ripless/signal_ops.hpp"
#include "ripless/solvers.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace ripless;

namespace {

struct Instance {
  RealMatrix A;
  RealVector x;
  RealVector y;
};

Instance make(ensembles::EnsembleSpec spec, Index m, Index s, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.x = harness::plant_signal(spec.n(), s, harness::Amplitude::Rademacher, 1.0, 1.0, rng);
  in.A = real_system(ensembles::build_matrix(spec, m, rng));
  in.y = in.A * in.x;
  const double sigma_m = sigma / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < in.y.size(); ++i) in.y(i) += sigma_m * rng.normal();
  return in;
}

void BM_BasisPursuitGaussian(benchmark::State& state) {
  const Instance in = make(ensembles::EnsembleSpec::gaussian(256), state.range(0), 5, 0.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solvers::basis_pursuit(in.A, in.y));
}
BENCHMARK(BM_BasisPursuitGaussian)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BasisPursuitDft(benchmark::State& state) {
  const Instance in = make(ensembles::EnsembleSpec::subsampled_dft(256), state.range(0), 5, 0.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solvers::basis_pursuit(in.A, in.y));
}
BENCHMARK(BM_BasisPursuitDft)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Lasso(benchmark::State& state) {
  const Index m = state.range(0);
  const Instance in = make(ensembles::EnsembleSpec::gaussian(256), m, 4, 0.5, 3);
  const double penalty = solvers::default_lambda(256) * 0.5 / std::sqrt(static_cast<double>(m));
  for (auto _ : state) benchmark::DoNotOptimize(solvers::lasso(in.A, in.y, penalty));
}
BENCHMARK(BM_Lasso)->Arg(92)->Arg(184)->Arg(368)->Arg(736)->Unit(benchmark::kMillisecond);

void BM_Dantzig(benchmark::State& state) {
  const Index m = state.range(0);
  const Instance in = make(ensembles::EnsembleSpec::gaussian(256), m, 4, 0.5, 4);
  const double bound = solvers::default_lambda(256) * 0.5 / std::sqrt(static_cast<double>(m));
  for (auto _ : state) benchmark::DoNotOptimize(solvers::dantzig(in.A, in.y, bound));
}
BENCHMARK(BM_Dantzig)->Arg(92)->Arg(184)->Arg(368)->Arg(736)->Unit(benchmark::kMillisecond);

void BM_RowSpace(benchmark::State& state) {
  const Instance in = make(ensembles::EnsembleSpec::subsampled_dft(256), state.range(0), 5, 0.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::RowSpace(in.A));
}
BENCHMARK(BM_RowSpace)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Golfing(benchmark::State& state) {
  const Index n = 256, s = 4;
  Rng rng(6);
  const RealVector x = harness::plant_signal(n, s, harness::Amplitude::Rademacher, 1.0, 1.0, rng);
  const SupportSet T = SupportSet::of(Signal(x));
  const auto config = certificates::GolfingConfig::standard(n, s, static_cast<double>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        certificates::golfing_from_ensemble(ensembles::EnsembleSpec::gaussian(n), T, x, config, Rng(++seed)));
}
BENCHMARK(BM_Golfing)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
