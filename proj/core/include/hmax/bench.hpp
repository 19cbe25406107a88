#pragma once

#include <span>
#include <string>
#include <vector>

#include "hmax/imgproc.hpp"

namespace hmax {

/// baseline: dense S1 on the raw image; approx1: dense S1 on the combined
/// image; approx2: separable S1 on the combined image.
enum class BenchMode { baseline, approx1, approx2 };

std::string_view bench_mode_name(BenchMode mode);
BenchMode parse_bench_mode(std::string_view name);

struct BenchRow {
  int size = 0;
  BenchMode mode = BenchMode::baseline;
  double mean_s = 0.0;
  double std_s = 0.0;  ///< sample standard deviation; 0 for a single repeat
  std::vector<double> samples_s;
};

struct BenchOptions {
  std::vector<BenchMode> modes{BenchMode::baseline, BenchMode::approx1, BenchMode::approx2};
  int repeats = 5;
  bool warmup = true;  ///< one untimed pass per mode before measuring
  CombineParams combine;
  ClaheParams clahe;
  std::uint64_t seed = 0;
};

/// Times the S1 stage alone (preprocessing happens before the clock starts) on
/// a synthetic square image per size, single-threaded. Modes are interleaved
/// within each repeat so slow drifts affect all of them alike.
std::vector<BenchRow> benchmark_s1(std::span<const int> sizes, const BenchOptions& opts = {});

/// size,mode,mean_s,std_s
std::string bench_csv(std::span<const BenchRow> rows);

struct ConvTiming {
  int filter_size = 0;
  double dense_s = 0.0;
  double separable_s = 0.0;
};

/// Mean time of convolving one image with the four orientations at the scale
/// whose filter size is M, for each M, dense and separable.
std::vector<ConvTiming> time_convolutions(std::span<const int> filter_sizes, int image_size, int repeats,
                                          std::uint64_t seed = 0);

/// Least-squares slope of log(y) against log(x).
double fit_power_exponent(std::span<const double> x, std::span<const double> y);

}  // namespace hmax
