#include <benchmark/benchmark.h>

#include "cmrf/bethe.hpp"
#include "cmrf/clamping.hpp"
#include "cmrf/exact.hpp"
#include "cmrf/gen.hpp"
#include "cmrf/meanfield.hpp"
#include "cmrf/trw.hpp"

namespace {

using namespace cmrf;

PairwiseModel mixed_grid(int side, std::uint64_t seed = 17) {
  GenSpec g;
  g.family = GenSpec::Family::Grid;
  g.rows = g.cols = side;
  g.w_lo = -6.0;
  g.w_hi = 6.0;
  g.seed = seed;
  return generate(g);
}

void BM_MeanField(benchmark::State& state) {
  PairwiseModel m = mixed_grid(static_cast<int>(state.range(0)));
  MfConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(mf_optimize(m, cfg).log_z);
}
BENCHMARK(BM_MeanField)->Arg(5)->Arg(7)->Arg(9);

void BM_BetheBp(benchmark::State& state) {
  PairwiseModel m = mixed_grid(static_cast<int>(state.range(0)));
  BpConfig cfg;
  cfg.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(bethe_optimize(m, cfg).log_z);
}
BENCHMARK(BM_BetheBp)->Arg(5)->Arg(7)->Arg(9);

void BM_Trw(benchmark::State& state) {
  PairwiseModel m = mixed_grid(static_cast<int>(state.range(0)));
  EdgeAppearance rho = exact_tree_weights(m);
  for (auto _ : state) benchmark::DoNotOptimize(trw_optimize(m, rho).log_z);
}
BENCHMARK(BM_Trw)->Arg(5)->Arg(7)->Arg(9);

void BM_Eliminate(benchmark::State& state) {
  PairwiseModel m = mixed_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eliminate_logz(m));
}
BENCHMARK(BM_Eliminate)->Arg(5)->Arg(7)->Arg(9);

void BM_WilsonSampling(benchmark::State& state) {
  PairwiseModel m = mixed_grid(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_tree_weights(m, static_cast<int>(state.range(0)), 3).rho[0]);
}
BENCHMARK(BM_WilsonSampling)->Arg(100)->Arg(1000);

void BM_ExactTreeWeights(benchmark::State& state) {
  PairwiseModel m = mixed_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_tree_weights(m).rho[0]);
}
BENCHMARK(BM_ExactTreeWeights)->Arg(7)->Arg(9);

void BM_ClampSumTrw(benchmark::State& state) {
  PairwiseModel m = mixed_grid(5);
  ClampConfig cfg;
  EdgeAppearance rho = exact_tree_weights(m);
  cfg.rho = rho;
  InferenceResult parent = run_inference(m, Method::TRW, cfg, &rho);
  for (auto _ : state)
    benchmark::DoNotOptimize(clamp_sum(m, Method::TRW, 0, cfg, &parent, &rho).aggregate);
}
BENCHMARK(BM_ClampSumTrw);

}  // namespace
