#pragma once

#include <complex>
#include <vector>

#include "hmax/image.hpp"

namespace hmax {

inline constexpr int kScales = 16;
inline constexpr int kOrientations = 4;
inline constexpr int kBands = 8;
inline constexpr int kScalesPerBand = 2;

/// How the Gaussian envelope width is derived for a scale.
enum class SigmaMode {
  lambda_ratio,  ///< sigma = 0.3 * lambda
  literal,       ///< sigma = 0.3 pixels
};

struct GaborOptions {
  SigmaMode sigma_mode = SigmaMode::lambda_ratio;
};

/// Per-scale shape parameters: gamma is the aspect ratio polynomial in the
/// filter size, lambda = gamma / 0.8.
struct GaborGeometry {
  int size = 0;
  double gamma = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
};

/// Filter side for a 1-based scale index: 7, 9, ..., 37.
int filter_size(int scale_index);

/// Orientation k * pi/4 for k in 0..3.
double orientation_angle(int k);

/// Index k for an orientation in {0, pi/4, pi/2, 3pi/4}; throws otherwise.
int orientation_index(double radians);

/// 1-based band holding a 1-based scale index: {1,2} -> 1, ..., {15,16} -> 8.
int band_of_scale(int scale_index);

GaborGeometry gabor_geometry(int scale_index, const GaborOptions& opts = {});

struct GaborFilter {
  int size = 0;
  int scale_index = 0;
  double orientation = 0.0;
  Matrix taps;  ///< zero-mean, unit L2
};

/// Raw (unnormalized) taps on the centred size x size grid. `aspect` replaces
/// the gamma of the v term; pass 1.0 for the isotropic filter.
Matrix gabor_taps(int scale_index, double orientation, double aspect, const GaborOptions& opts = {});

/// Anisotropic filter: raw taps with gamma from the geometry, then
/// mean-subtracted and L2-normalized.
GaborFilter make_filter(int scale_index, double orientation, const GaborOptions& opts = {});

/// Isotropic (gamma = 1) counterpart, normalized the same way. This is the
/// dense filter a separable filter reproduces.
GaborFilter make_isotropic_filter(int scale_index, double orientation, const GaborOptions& opts = {});

/// Isotropic Gabor as a product of two complex 1-D kernels:
/// Re(fx[x] * gy[y]) equals the raw isotropic tap at (x, y).
///
/// Normalization of the dense filter (subtract mean, divide by norm) is kept
/// as two scalars so the separable response can reproduce the normalized
/// dense response exactly: corr(img, (G - mean)/norm) =
/// (corr(img, G) - mean * boxsum(img)) / norm.
struct SeparableGaborFilter {
  int size = 0;
  int scale_index = 0;
  double orientation = 0.0;
  std::vector<std::complex<double>> fx;  ///< along columns (x)
  std::vector<std::complex<double>> gy;  ///< along rows (y)
  double tap_mean = 0.0;
  double tap_norm = 1.0;
};

SeparableGaborFilter make_separable(int scale_index, double orientation, const GaborOptions& opts = {});

/// Re(outer(gy, fx)) on the size x size grid, before normalization.
Matrix separable_taps(const SeparableGaborFilter& f);

/// The 64-filter bank, scale-major: index = (scale_index - 1) * 4 + k.
///
/// A dense bank holds the anisotropic filters. A separable bank holds the
/// separable filters together with their isotropic dense equivalents, so the
/// same bank can run either convolution path.
struct GaborBank {
  bool separable = false;
  GaborOptions options;
  std::vector<GaborFilter> dense;
  std::vector<SeparableGaborFilter> factored;

  std::size_t size() const noexcept { return dense.size(); }
  static std::size_t index(int scale_index, int orientation_k) {
    return static_cast<std::size_t>((scale_index - 1) * kOrientations + orientation_k);
  }
};

GaborBank make_bank(bool separable, const GaborOptions& opts = {});

/// Same-size zero-padded correlation followed by |.|. O(N^2 M^2).
ResponseMap convolve_dense(const GrayImage& img, const GaborFilter& f);

/// Row pass with fx, column pass with gy, real part, normalization correction,
/// |.|. O(N^2 M).
ResponseMap convolve_separable(const GrayImage& img, const SeparableGaborFilter& f);

}  // namespace hmax
