#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hmax/image.hpp"

namespace hmax {

/// Magnification exponent and blend weight of the combined-image chain.
struct CombineParams {
  double alpha = 0.75;  ///< exponent applied to singular values, (0, 2]
  double c = 0.25;      ///< blend weight, [0, 1]

  void validate() const;
};

/// Contrast-limited adaptive histogram equalization settings.
struct ClaheParams {
  int tile = 8;        ///< tile side in pixels, >= 2
  double clip = 0.01;  ///< per-bin clip limit as a fraction of tile area, (0, 1]

  void validate() const;
};

// --- ingestion -------------------------------------------------------------

/// Reads a PNG, JPEG or binary PGM (P5) file. RGB input is reduced to luminance with
/// BT.601 weights; 8-bit values are scaled by 1/255 (PGM: 1/maxval).
GrayImage load_grayscale(const std::filesystem::path& path);

GrayImage decode_image(std::span<const std::uint8_t> bytes);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage decode_png(std::span<const std::uint8_t> bytes);
/// Baseline or progressive JPEG; colour converted with the same luminance weights.
GrayImage decode_jpeg(std::span<const std::uint8_t> bytes);

/// 8-bit encoders; values are clamped to [0,1] and rounded to the nearest level.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
std::vector<std::uint8_t> encode_png(const GrayImage& img);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// --- preprocessing ---------------------------------------------------------

/// Bilinear rescale to `target_h` rows; width follows the aspect ratio.
GrayImage resize_height(const GrayImage& img, int target_h);

/// CLAHE over square tiles of side `tile` with 256 intensity bins and bilinear
/// blending between neighbouring tile mappings. Images smaller than one tile
/// get global equalization; a constant image is returned unchanged.
GrayImage adaptive_hist_eq(const GrayImage& img, int tile = 8, double clip = 0.01);
GrayImage adaptive_hist_eq(const GrayImage& img, const ClaheParams& params);

/// L * D^alpha * R^T without clamping. Throws ErrorKind::numerical if the SVD
/// does not converge.
GrayImage svd_magnify(const GrayImage& img, double alpha);

/// `svd_magnify` clamped to [0,1].
GrayImage svd_reconstruct(const GrayImage& img, double alpha);

/// Per-pixel (adapted + c * reconstructed) / (1 + c).
GrayImage combine(const GrayImage& adapted, const GrayImage& reconstructed, double c);

/// adaptive_hist_eq -> svd_reconstruct -> combine.
GrayImage combined_image(const GrayImage& img, const CombineParams& params, const ClaheParams& clahe = {});

}  // namespace hmax
