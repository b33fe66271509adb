#include <benchmark/benchmark.h>

#include "ccm/concord.hpp"
#include "ccm/logistic.hpp"
#include "ccm/solver.hpp"
#include "support/generators.hpp"

namespace {

using namespace ccm;

void BM_SweepLogistic(benchmark::State& state) {
  testing::Rng rng(7);
  const auto n = static_cast<Index>(state.range(0));
  const auto ds = testing::random_logistic(rng, 2 * n, n);
  const F1Problem p = logistic::make_problem(ds, 0.2 * logistic::origin_lambda_bound(ds));
  const auto order = resolve_order({}, static_cast<std::size_t>(n));
  Iterate it(p.E, default_start(p));
  for (auto _ : state) {
    sweep_f1(p, it, order);
    benchmark::DoNotOptimize(it.x().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SweepLogistic)->Arg(50)->Arg(200)->Arg(800);

void BM_SweepF2(benchmark::State& state) {
  testing::Rng rng(8);
  const auto n = static_cast<Index>(state.range(0));
  const F2Problem q = testing::random_f2_scaled(rng, n / 2, n, 5, 0.3);
  const auto order = resolve_order({}, static_cast<std::size_t>(n));
  Iterate it(q.E, default_start(q));
  for (auto _ : state) {
    sweep_f2(q, it, order);
    benchmark::DoNotOptimize(it.x().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SweepF2)->Arg(60)->Arg(400)->Arg(1600);

// Full CONCORD solve on both paths; the vectorized one materializes a
// p^2 x p(p+1)/2 design matrix.
void BM_Concord(benchmark::State& state, concord::SolvePath path) {
  testing::Rng rng(9);
  const auto p = static_cast<Index>(state.range(0));
  const concord::CovarianceProblem cp{testing::random_covariance(rng, p, 3 * p), 0.2};
  for (auto _ : state) {
    const concord::ConcordEstimate est = concord::concord_solve(cp, {}, path);
    benchmark::DoNotOptimize(est.omega.data());
  }
}
BENCHMARK_CAPTURE(BM_Concord, direct, concord::SolvePath::kDirect)->Arg(5)->Arg(10)->Arg(20);
BENCHMARK_CAPTURE(BM_Concord, vectorized, concord::SolvePath::kVectorized)
    ->Arg(5)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
