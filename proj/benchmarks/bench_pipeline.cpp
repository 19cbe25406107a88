#include <benchmark/benchmark.h>

#include "hmax/learning.hpp"
#include "hmax/synthetic.hpp"

namespace {

using namespace hmax;

C1Response sample_c1(int size) {
  FeatureConfig cfg;
  cfg.conv = ConvMode::separable;
  return compute_c1(bench_image(size, 5), make_bank(true), cfg);
}

void BM_C1(benchmark::State& state) {
  const GaborBank bank = make_bank(true);
  const S1Response s1 = s1_layer(bench_image(140, 2), bank, ConvMode::separable);
  const C1Params params;
  for (auto _ : state) benchmark::DoNotOptimize(c1_layer(s1, params));
}
BENCHMARK(BM_C1)->Unit(benchmark::kMillisecond);

// Fused S2/C2 for a prototype count given by the argument.
void BM_C2(benchmark::State& state) {
  const C1Response c1 = sample_c1(140);
  const int sizes[] = {4, 8, 12, 16};
  const std::vector<C1Response> pool{c1};
  const PrototypeSet protos = sample_random_prototypes(pool, static_cast<int>(state.range(0)) / 4, sizes, 9);
  for (auto _ : state) benchmark::DoNotOptimize(c2_from_c1(c1, protos, 1.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(protos.size()));
}
BENCHMARK(BM_C2)->Arg(40)->Arg(400)->Unit(benchmark::kMillisecond);

// k-medoids on a pool of 4x4x4 patches.
void BM_Pam(benchmark::State& state) {
  Rng rng(4);
  std::vector<PatchTensor> pool(static_cast<std::size_t>(state.range(0)), PatchTensor(64));
  for (auto& p : pool)
    for (float& v : p) v = static_cast<float>(uniform_unit(rng));
  for (auto _ : state) benchmark::DoNotOptimize(pam_cluster(pool, 5, 1000000, 1));
}
BENCHMARK(BM_Pam)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
