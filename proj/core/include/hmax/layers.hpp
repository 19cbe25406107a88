#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hmax/gabor.hpp"
#include "hmax/image.hpp"
#include "hmax/imgproc.hpp"
#include "hmax/prototype.hpp"

namespace hmax {

enum class ConvMode { dense, separable };

/// 64 S1 maps: [band][scale within band][orientation], all the size of the input.
struct S1Response {
  using Band = std::array<std::array<ResponseMap, kOrientations>, kScalesPerBand>;
  std::array<Band, kBands> bands;

  const ResponseMap& map(int band0, int scale_in_band, int orientation) const {
    return bands[static_cast<std::size_t>(band0)][static_cast<std::size_t>(scale_in_band)]
                [static_cast<std::size_t>(orientation)];
  }
  ResponseMap& map(int band0, int scale_in_band, int orientation) {
    return bands[static_cast<std::size_t>(band0)][static_cast<std::size_t>(scale_in_band)]
                [static_cast<std::size_t>(orientation)];
  }
};

enum class Overlap {
  none,  ///< stride = n (disjoint pooling windows)
  half,  ///< stride = step of band
};

/// C1 pooling geometry. Bands are 1-based here as in the usual tables:
/// grid n = 8, 10, ..., 22 and step 4, 5, ..., 11.
struct C1Params {
  Overlap overlap = Overlap::half;

  static int grid_size(int band) { return 8 + 2 * (band - 1); }
  static int step(int band) { return 4 + (band - 1); }
  int stride(int band) const { return overlap == Overlap::none ? grid_size(band) : step(band); }
};

/// 8 bands x 4 orientations of pooled maps.
struct C1Response {
  using Band = std::array<ResponseMap, kOrientations>;
  std::array<Band, kBands> bands;

  const ResponseMap& map(int band0, int orientation) const {
    return bands[static_cast<std::size_t>(band0)][static_cast<std::size_t>(orientation)];
  }
  ResponseMap& map(int band0, int orientation) {
    return bands[static_cast<std::size_t>(band0)][static_cast<std::size_t>(orientation)];
  }
  int rows(int band0) const { return map(band0, 0).rows(); }
  int cols(int band0) const { return map(band0, 0).cols(); }
};

enum class EmbedMode { off, all, banded };

/// Relative-gap interval [lo_pct, hi_pct) with its embedding weight.
struct EmbedInterval {
  double lo_pct = 0.0;
  double hi_pct = 0.0;
  double weight = 0.0;
};

/// Which minimum-over-scales values are added to the maximum before pooling,
/// and with what weight.
struct EmbedRule {
  EmbedMode mode = EmbedMode::off;
  double w_all = 0.0;
  std::vector<EmbedInterval> intervals;

  static EmbedRule off() { return {}; }
  static EmbedRule all(double w) { return {EmbedMode::all, w, {}}; }
  static EmbedRule banded(std::vector<EmbedInterval> intervals) { return {EmbedMode::banded, 0.0, std::move(intervals)}; }
  /// Every pixel, w = 1.
  static EmbedRule opt1() { return all(1.0); }
  /// [0,2%): 0.5, [2,5%): 0.1.
  static EmbedRule opt2() { return banded({{0.0, 2.0, 0.5}, {2.0, 5.0, 0.1}}); }
  /// [0,2%): 1, [2,5%): 0.5.
  static EmbedRule opt3() { return banded({{0.0, 2.0, 1.0}, {2.0, 5.0, 0.5}}); }

  void validate() const;

  /// Weight applied at a pixel whose scale maximum and minimum are given.
  double weight(double max_value, double min_value) const;
};

/// Relative gap (max - min) / max in percent; 0 when max is 0.
double relative_gap_pct(double max_value, double min_value);

/// max + w * min with w from `rule`.
double embedded_value(double max_value, double min_value, const EmbedRule& rule);

/// Per-prototype, per-band S2 maps; a band map is empty when the prototype
/// does not fit inside that band's C1 grid.
struct S2Response {
  std::vector<std::array<ResponseMap, kBands>> maps;
};

using C2Vector = std::vector<double>;

/// Everything that selects between the baseline and the optimized variants.
struct FeatureConfig {
  std::optional<CombineParams> combine;  ///< combined-image preprocessing when set
  ClaheParams clahe;
  ConvMode conv = ConvMode::dense;
  C1Params c1;
  EmbedRule embed;
  double beta = 1.0;
};

S1Response s1_layer(const GrayImage& img, const GaborBank& bank, ConvMode mode);

C1Response c1_layer(const S1Response& s1, const C1Params& params);
C1Response c1_layer_embedded(const S1Response& s1, const C1Params& params, const EmbedRule& rule);

/// Squared Frobenius distance between a prototype and the C1 patch whose
/// top-left corner is (row, col) in band `band0`.
double patch_distance_sq(const C1Response& c1, int band0, int row, int col, const Prototype& proto);

S2Response s2_layer(const C1Response& c1, const PrototypeSet& protos, double beta);

/// Global max per prototype; 0 for a prototype with no valid position.
C2Vector c2_layer(const S2Response& s2);

/// Fused S2 + C2 that never materializes the S2 maps. Bit-identical to
/// c2_layer(s2_layer(c1, protos, beta)).
C2Vector c2_from_c1(const C1Response& c1, const PrototypeSet& protos, double beta);

/// Optional preprocessing then S1 and C1 (with or without embedding).
C1Response compute_c1(const GrayImage& img, const GaborBank& bank, const FeatureConfig& cfg);

/// Full forward pass to the C2 vector.
C2Vector extract_features(const GrayImage& img, const GaborBank& bank, const PrototypeSet& protos,
                          const FeatureConfig& cfg);

}  // namespace hmax
