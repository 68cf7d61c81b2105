#include <benchmark/benchmark.h>

#include "wdm/denoiser.hpp"
#include "wdm/preprocess.hpp"
#include "wdm/rng.hpp"
#include "wdm/wavelet.hpp"

namespace {

wdm::Volume3 random_volume(std::size_t n) {
  wdm::Volume3 v({n, n, n});
  wdm::RngState rng(1);
  rng.fill_normal(v.data());
  return v;
}

void set_voxel_counters(benchmark::State& state, std::size_t n) {
  state.counters["voxels/s"] = benchmark::Counter(static_cast<double>(state.iterations() * n * n * n),
                                                  benchmark::Counter::kIsRate);
}

void BM_Dwt3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto v = random_volume(n);
  for (auto _ : state) benchmark::DoNotOptimize(wdm::dwt3(v));
  set_voxel_counters(state, n);
}

void BM_Idwt3(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto c = wdm::dwt3(random_volume(n));
  for (auto _ : state) benchmark::DoNotOptimize(wdm::idwt3(c));
  set_voxel_counters(state, n);
}

void BM_AvgPool2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto v = random_volume(n);
  for (auto _ : state) benchmark::DoNotOptimize(wdm::avg_pool2(v));
  set_voxel_counters(state, n);
}

void BM_DenoiserForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  wdm::TinyConvDenoiser den(wdm::NetConfig::desk());
  wdm::RngState rng(2);
  den.net().init(rng);
  const auto c = wdm::dwt3(random_volume(n));
  for (auto _ : state) benchmark::DoNotOptimize(den.predict(c, 500));
  set_voxel_counters(state, n);
}

}  // namespace

BENCHMARK(BM_Dwt3)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Idwt3)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AvgPool2)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenoiserForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
