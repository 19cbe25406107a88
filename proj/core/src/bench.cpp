#include "hmax/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "hmax/error.hpp"
#include "hmax/gabor.hpp"
#include "hmax/layers.hpp"
#include "hmax/synthetic.hpp"

namespace hmax {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_once(Fn&& fn) {
  const auto t = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void summarize(BenchRow& row) {
  const auto n = static_cast<double>(row.samples_s.size());
  double sum = 0.0;
  for (double v : row.samples_s) sum += v;
  row.mean_s = sum / n;
  double ss = 0.0;
  for (double v : row.samples_s) ss += (v - row.mean_s) * (v - row.mean_s);
  row.std_s = row.samples_s.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

int scale_of_size(int m) {
  for (int s = 1; s <= kScales; ++s)
    if (filter_size(s) == m) return s;
  fail(ErrorKind::invalid_argument, "no filter scale has size " + std::to_string(m));
}

}  // namespace

std::string_view bench_mode_name(BenchMode mode) {
  switch (mode) {
    case BenchMode::baseline: return "baseline";
    case BenchMode::approx1: return "approx1";
    case BenchMode::approx2: return "approx2";
  }
  return "?";
}

BenchMode parse_bench_mode(std::string_view name) {
  if (name == "baseline") return BenchMode::baseline;
  if (name == "approx1") return BenchMode::approx1;
  if (name == "approx2") return BenchMode::approx2;
  fail(ErrorKind::invalid_argument, "unknown bench mode '" + std::string(name) + "'");
}

std::vector<BenchRow> benchmark_s1(std::span<const int> sizes, const BenchOptions& opts) {
  require(opts.repeats >= 1, ErrorKind::invalid_argument, "repeats must be >= 1");
  require(!opts.modes.empty(), ErrorKind::invalid_argument, "no bench modes");
  const GaborBank dense = make_bank(false);
  const GaborBank separable = make_bank(true);

  std::vector<BenchRow> rows;
  for (int size : sizes) {
    require(size >= 1, ErrorKind::invalid_argument, "image size must be positive");
    const GrayImage raw = bench_image(size, opts.seed + static_cast<std::uint64_t>(size));
    const GrayImage combined = combined_image(raw, opts.combine, opts.clahe);

    auto run = [&](BenchMode mode) {
      switch (mode) {
        case BenchMode::baseline: return time_once([&] { (void)s1_layer(raw, dense, ConvMode::dense); });
        case BenchMode::approx1: return time_once([&] { (void)s1_layer(combined, dense, ConvMode::dense); });
        case BenchMode::approx2:
          return time_once([&] { (void)s1_layer(combined, separable, ConvMode::separable); });
      }
      return 0.0;
    };

    const std::size_t first = rows.size();
    for (BenchMode mode : opts.modes) rows.push_back({size, mode, 0.0, 0.0, {}});
    if (opts.warmup)
      for (BenchMode mode : opts.modes) (void)run(mode);
    for (int r = 0; r < opts.repeats; ++r) {
      // rotate the starting mode so no mode always runs first
      for (std::size_t k = 0; k < opts.modes.size(); ++k) {
        const std::size_t m = (k + static_cast<std::size_t>(r)) % opts.modes.size();
        rows[first + m].samples_s.push_back(run(opts.modes[m]));
      }
    }
    for (std::size_t m = 0; m < opts.modes.size(); ++m) summarize(rows[first + m]);
  }
  return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "size,mode,mean_s,std_s\n";
  for (const BenchRow& row : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f\n", row.size, std::string(bench_mode_name(row.mode)).c_str(),
                  row.mean_s, row.std_s);
    out += buf;
  }
  return out;
}

std::vector<ConvTiming> time_convolutions(std::span<const int> filter_sizes, int image_size, int repeats,
                                          std::uint64_t seed) {
  require(repeats >= 1, ErrorKind::invalid_argument, "repeats must be >= 1");
  const GrayImage img = bench_image(image_size, seed);
  std::vector<ConvTiming> out;
  for (int m : filter_sizes) {
    const int s = scale_of_size(m);
    std::vector<GaborFilter> dense;
    std::vector<SeparableGaborFilter> sep;
    for (int k = 0; k < kOrientations; ++k) {
      dense.push_back(make_isotropic_filter(s, orientation_angle(k)));
      sep.push_back(make_separable(s, orientation_angle(k)));
    }
    auto dense_pass = [&] {
      for (const auto& f : dense) (void)convolve_dense(img, f);
    };
    auto sep_pass = [&] {
      for (const auto& f : sep) (void)convolve_separable(img, f);
    };
    dense_pass();
    sep_pass();
    ConvTiming t{m, 0.0, 0.0};
    for (int r = 0; r < repeats; ++r) {
      t.dense_s += time_once(dense_pass);
      t.separable_s += time_once(sep_pass);
    }
    t.dense_s /= repeats;
    t.separable_s /= repeats;
    out.push_back(t);
  }
  return out;
}

double fit_power_exponent(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::invalid_argument, "need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::invalid_argument, "power fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  require(sxx > 0.0, ErrorKind::invalid_argument, "power fit needs distinct x values");
  return sxy / sxx;
}

}  // namespace hmax
