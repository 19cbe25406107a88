#include "hmax/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmax/error.hpp"

namespace hmax {

// --- S1 ----------------------------------------------------------------------

S1Response s1_layer(const GrayImage& img, const GaborBank& bank, ConvMode mode) {
  require(bank.size() == static_cast<std::size_t>(kScales * kOrientations), ErrorKind::invalid_argument,
          "Gabor bank must hold 64 filters");
  const int largest = filter_size(kScales);
  require(img.height() >= largest && img.width() >= largest, ErrorKind::invalid_argument,
          "image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
              " is smaller than the largest filter (37x37)");
  require(mode == ConvMode::dense || bank.separable, ErrorKind::invalid_argument,
          "separable convolution requires a separable bank");

  S1Response s1;
  for (int s = 1; s <= kScales; ++s) {
    const int band0 = band_of_scale(s) - 1;
    const int within = (s - 1) % kScalesPerBand;
    for (int k = 0; k < kOrientations; ++k) {
      const std::size_t idx = GaborBank::index(s, k);
      s1.map(band0, within, k) = mode == ConvMode::dense ? convolve_dense(img, bank.dense[idx])
                                                         : convolve_separable(img, bank.factored[idx]);
    }
  }
  return s1;
}

// --- C1 ----------------------------------------------------------------------

void EmbedRule::validate() const {
  require(w_all >= 0.0 && w_all <= 1.0, ErrorKind::invalid_argument, "embedding weight must lie in [0, 1]");
  auto sorted = intervals;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lo_pct < b.lo_pct; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const EmbedInterval& iv = sorted[i];
    require(iv.lo_pct >= 0.0 && iv.lo_pct < iv.hi_pct && iv.hi_pct <= 5.0, ErrorKind::invalid_argument,
            "embedding intervals must be non-empty and lie within [0%, 5%)");
    require(iv.weight >= 0.0 && iv.weight <= 1.0, ErrorKind::invalid_argument,
            "embedding weight must lie in [0, 1]");
    require(i == 0 || sorted[i - 1].hi_pct <= iv.lo_pct, ErrorKind::invalid_argument,
            "embedding intervals must be disjoint");
  }
}

double relative_gap_pct(double max_value, double min_value) {
  if (max_value == 0.0) return 0.0;
  return (max_value - min_value) / max_value * 100.0;
}

double EmbedRule::weight(double max_value, double min_value) const {
  switch (mode) {
    case EmbedMode::off: return 0.0;
    case EmbedMode::all: return w_all;
    case EmbedMode::banded: {
      const double d = relative_gap_pct(max_value, min_value);
      for (const EmbedInterval& iv : intervals) {
        if (d >= iv.lo_pct && d < iv.hi_pct) return iv.weight;
      }
      return 0.0;
    }
  }
  return 0.0;
}

double embedded_value(double max_value, double min_value, const EmbedRule& rule) {
  return max_value + rule.weight(max_value, min_value) * min_value;
}

namespace {

ResponseMap pool(const ResponseMap& src, int n, int stride) {
  require(src.rows() >= n && src.cols() >= n, ErrorKind::invalid_argument,
          "S1 map " + std::to_string(src.rows()) + "x" + std::to_string(src.cols()) + " is smaller than the " +
              std::to_string(n) + "x" + std::to_string(n) + " C1 grid");
  const int out_rows = (src.rows() - n) / stride + 1;
  const int out_cols = (src.cols() - n) / stride + 1;

  // Separable max: horizontal windows first, then vertical.
  Matrix horiz(src.rows(), out_cols);
  for (int r = 0; r < src.rows(); ++r) {
    auto row = src.row(r);
    for (int oc = 0; oc < out_cols; ++oc) {
      const auto first = row.begin() + oc * stride;
      horiz(r, oc) = *std::max_element(first, first + n);
    }
  }
  ResponseMap out(out_rows, out_cols);
  for (int orow = 0; orow < out_rows; ++orow) {
    for (int oc = 0; oc < out_cols; ++oc) {
      double best = horiz(orow * stride, oc);
      for (int i = 1; i < n; ++i) best = std::max(best, horiz(orow * stride + i, oc));
      out(orow, oc) = best;
    }
  }
  return out;
}

template <typename Merge>
C1Response c1_with(const S1Response& s1, const C1Params& params, Merge merge) {
  C1Response c1;
  for (int b = 0; b < kBands; ++b) {
    const int band = b + 1;
    for (int k = 0; k < kOrientations; ++k) {
      const ResponseMap& a = s1.map(b, 0, k);
      const ResponseMap& z = s1.map(b, 1, k);
      require(a.rows() == z.rows() && a.cols() == z.cols(), ErrorKind::invalid_argument,
              "the two scales of a band must have equal map sizes");
      ResponseMap merged(a.rows(), a.cols());
      auto av = a.values();
      auto zv = z.values();
      auto mv = merged.values();
      for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = merge(av[i], zv[i]);
      c1.map(b, k) = pool(merged, C1Params::grid_size(band), params.stride(band));
    }
  }
  return c1;
}

}  // namespace

C1Response c1_layer(const S1Response& s1, const C1Params& params) {
  return c1_with(s1, params, [](double a, double b) { return std::max(a, b); });
}

C1Response c1_layer_embedded(const S1Response& s1, const C1Params& params, const EmbedRule& rule) {
  rule.validate();
  return c1_with(s1, params, [&rule](double a, double b) {
    return embedded_value(std::max(a, b), std::min(a, b), rule);
  });
}

// --- S2 / C2 -----------------------------------------------------------------

namespace {

// One band's four orientation maps interleaved to match the prototype layout,
// so every patch row is a contiguous run of n*4 values.
struct InterleavedBand {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  explicit InterleavedBand(const C1Response::Band& band) : rows(band[0].rows()), cols(band[0].cols()) {
    data.resize(static_cast<std::size_t>(rows) * cols * kOrientations);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        for (int o = 0; o < kOrientations; ++o)
          data[(static_cast<std::size_t>(r) * cols + c) * kOrientations + o] = band[static_cast<std::size_t>(o)](r, c);
  }

  bool fits(int n) const { return rows >= n && cols >= n; }

  // Accumulates row by row and gives up once the partial sum reaches `bound`;
  // the result is exact whenever it is below `bound`.
  double distance_sq(int row, int col, const std::vector<double>& proto, int n, double bound) const {
    const std::size_t span = static_cast<std::size_t>(n) * kOrientations;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* x = data.data() + (static_cast<std::size_t>(row + i) * cols + col) * kOrientations;
      const double* p = proto.data() + static_cast<std::size_t>(i) * span;
      for (std::size_t t = 0; t < span; ++t) {
        const double d = x[t] - p[t];
        sum += d * d;
      }
      if (sum >= bound) return sum;
    }
    return sum;
  }
};

std::vector<double> widen(const Prototype& p) { return {p.tensor.begin(), p.tensor.end()}; }

void check_beta(double beta) {
  require(beta > 0.0 && std::isfinite(beta), ErrorKind::invalid_argument, "beta must be positive");
}

}  // namespace

double patch_distance_sq(const C1Response& c1, int band0, int row, int col, const Prototype& proto) {
  const int n = proto.size;
  require(row >= 0 && col >= 0 && row + n <= c1.rows(band0) && col + n <= c1.cols(band0), ErrorKind::invalid_argument,
          "patch does not fit in band");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int o = 0; o < kOrientations; ++o) {
        const double d = c1.map(band0, o)(row + i, col + j) - static_cast<double>(proto.at(i, j, o));
        sum += d * d;
      }
    }
  }
  return sum;
}

S2Response s2_layer(const C1Response& c1, const PrototypeSet& protos, double beta) {
  check_beta(beta);
  std::vector<InterleavedBand> bands;
  for (const auto& band : c1.bands) bands.emplace_back(band);

  S2Response s2;
  s2.maps.resize(protos.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < protos.size(); ++p) {
    const Prototype& proto = protos.prototypes[p];
    const std::vector<double> wide = widen(proto);
    const int n = proto.size;
    for (int b = 0; b < kBands; ++b) {
      const InterleavedBand& band = bands[static_cast<std::size_t>(b)];
      if (!band.fits(n)) continue;
      ResponseMap out(band.rows - n + 1, band.cols - n + 1);
      for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) out(r, c) = std::exp(-beta * band.distance_sq(r, c, wide, n, inf));
      s2.maps[p][static_cast<std::size_t>(b)] = std::move(out);
    }
  }
  return s2;
}

C2Vector c2_layer(const S2Response& s2) {
  require(!s2.maps.empty(), ErrorKind::invalid_argument, "S2 response is empty");
  C2Vector c2(s2.maps.size(), 0.0);
  for (std::size_t p = 0; p < s2.maps.size(); ++p) {
    for (const ResponseMap& m : s2.maps[p]) {
      for (double v : m.values()) c2[p] = std::max(c2[p], v);
    }
  }
  return c2;
}

C2Vector c2_from_c1(const C1Response& c1, const PrototypeSet& protos, double beta) {
  check_beta(beta);
  std::vector<InterleavedBand> bands;
  for (const auto& band : c1.bands) bands.emplace_back(band);

  C2Vector c2(protos.size(), 0.0);
  for (std::size_t p = 0; p < protos.size(); ++p) {
    const Prototype& proto = protos.prototypes[p];
    const std::vector<double> wide = widen(proto);
    const int n = proto.size;
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const InterleavedBand& band : bands) {
      if (!band.fits(n)) continue;
      any = true;
      for (int r = 0; r + n <= band.rows; ++r)
        for (int c = 0; c + n <= band.cols; ++c) best = std::min(best, band.distance_sq(r, c, wide, n, best));
    }
    c2[p] = any ? std::exp(-beta * best) : 0.0;
  }
  return c2;
}

C1Response compute_c1(const GrayImage& img, const GaborBank& bank, const FeatureConfig& cfg) {
  const GrayImage input = cfg.combine ? combined_image(img, *cfg.combine, cfg.clahe) : img;
  const S1Response s1 = s1_layer(input, bank, cfg.conv);
  return cfg.embed.mode == EmbedMode::off ? c1_layer(s1, cfg.c1) : c1_layer_embedded(s1, cfg.c1, cfg.embed);
}

C2Vector extract_features(const GrayImage& img, const GaborBank& bank, const PrototypeSet& protos,
                          const FeatureConfig& cfg) {
  return c2_from_c1(compute_c1(img, bank, cfg), protos, cfg.beta);
}

}  // namespace hmax
