#include <benchmark/benchmark.h>

#include "hmax/gabor.hpp"
#include "hmax/imgproc.hpp"
#include "hmax/layers.hpp"
#include "hmax/synthetic.hpp"

namespace {

using namespace hmax;

int scale_for_size(int m) { return (m - 7) / 2 + 1; }

// One filter, four orientations, on a fixed 128x128 image; the argument is M.
void BM_ConvDense(benchmark::State& state) {
  const int s = scale_for_size(static_cast<int>(state.range(0)));
  const GrayImage img = bench_image(128, 1);
  std::vector<GaborFilter> filters;
  for (int k = 0; k < kOrientations; ++k) filters.push_back(make_isotropic_filter(s, orientation_angle(k)));
  for (auto _ : state)
    for (const auto& f : filters) benchmark::DoNotOptimize(convolve_dense(img, f));
}
BENCHMARK(BM_ConvDense)->DenseRange(7, 37, 6)->Unit(benchmark::kMillisecond);

void BM_ConvSeparable(benchmark::State& state) {
  const int s = scale_for_size(static_cast<int>(state.range(0)));
  const GrayImage img = bench_image(128, 1);
  std::vector<SeparableGaborFilter> filters;
  for (int k = 0; k < kOrientations; ++k) filters.push_back(make_separable(s, orientation_angle(k)));
  for (auto _ : state)
    for (const auto& f : filters) benchmark::DoNotOptimize(convolve_separable(img, f));
}
BENCHMARK(BM_ConvSeparable)->DenseRange(7, 37, 6)->Unit(benchmark::kMillisecond);

// Full S1 stage; arguments are image size and mode (0 baseline, 1 approx1, 2 approx2).
void BM_S1(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const int mode = static_cast<int>(state.range(1));
  const GrayImage raw = bench_image(size, static_cast<std::uint64_t>(size));
  const GrayImage input = mode == 0 ? raw : combined_image(raw, CombineParams{});
  const GaborBank bank = make_bank(mode == 2);
  const ConvMode conv = mode == 2 ? ConvMode::separable : ConvMode::dense;
  for (auto _ : state) benchmark::DoNotOptimize(s1_layer(input, bank, conv));
  state.SetLabel(mode == 0 ? "baseline" : mode == 1 ? "approx1" : "approx2");
}
BENCHMARK(BM_S1)->ArgsProduct({{100, 160, 256}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_CombinedImage(benchmark::State& state) {
  const GrayImage raw = bench_image(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(combined_image(raw, CombineParams{}));
}
BENCHMARK(BM_CombinedImage)->Arg(140)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
