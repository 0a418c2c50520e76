#include <benchmark/benchmark.h>

#include "whiteout/bounds.hpp"
#include "whiteout/filter.hpp"
#include "whiteout/seqstep.hpp"
#include "whiteout/simulator.hpp"

using namespace whiteout;

static void BM_LassoFast(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto s = make_equicorrelated(d, 0.3);
  auto plan = validate_delta(s, make_equi_delta(s));
  Stream rng(1);
  VectorXd bh(d);
  rng.normal_fill(bh.data(), d);
  bh.head(d / 10).array() += 4.0;
  auto split = whiten_known_sigma(bh, plan, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lasso_signed_max_fast(split, plan));
}
BENCHMARK(BM_LassoFast)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_DeltaLowerBounds(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto s = make_equicorrelated(d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(delta_order_lower_bounds(s.eigen()));
}
BENCHMARK(BM_DeltaLowerBounds)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SeqStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Stream rng(2);
  VectorXd w(d);
  rng.normal_fill(w.data(), d);
  w.head(d / 5).array() += 3.0;
  for (auto _ : state) benchmark::DoNotOptimize(knockoff_plus_threshold(w, 0.1));
}
BENCHMARK(BM_SeqStep)->Arg(1000)->Arg(100000);

static void BM_EtaWalk(benchmark::State& state) {
  const double delta = default_delta(0.05);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_eta_walk_bound(74, 1000000, 0.05, delta, 100, 3));
}
BENCHMARK(BM_EtaWalk)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
