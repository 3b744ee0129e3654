#include <benchmark/benchmark.h>

#include "curemst/cure_em.hpp"
#include "curemst/inference.hpp"
#include "curemst/km.hpp"
#include "curemst/mst.hpp"
#include "curemst/settings.hpp"

using namespace curemst;

namespace {

TwoSampleDataset part_one(std::size_t n) { return sample_setting(setting_by_id("I.1"), n, n, 7); }
TwoSampleDataset part_two(std::size_t n) { return sample_setting(setting_by_id("II.1"), n, n, 7); }

void BM_KaplanMeier(benchmark::State& state) {
  const auto ds = part_one(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_km(ds.sample1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KaplanMeier)->Arg(100)->Arg(1000)->Arg(10000);

void BM_TwoSampleEstimate(benchmark::State& state) {
  const auto ds = part_one(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(two_sample_estimate(fit_km(ds.sample1), fit_km(ds.sample2)));
  }
}
BENCHMARK(BM_TwoSampleEstimate)->Arg(200)->Arg(2000);

void BM_PermutationInference(benchmark::State& state) {
  const auto ds = part_one(200);
  PermutationOptions o;
  o.B = static_cast<std::size_t>(state.range(0));
  o.seed = 1;
  o.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(permutation_inference(ds, o));
}
BENCHMARK(BM_PermutationInference)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_LogisticCoxFit(benchmark::State& state) {
  const auto ds = part_two(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic_cox(ds.sample1));
}
BENCHMARK(BM_LogisticCoxFit)->Arg(150)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace
