#include "hmax/gabor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hmax/error.hpp"

namespace hmax {

namespace {

void check_scale(int scale_index) {
  require(scale_index >= 1 && scale_index <= kScales, ErrorKind::invalid_argument,
          "scale index must lie in 1..16, got " + std::to_string(scale_index));
}

void normalize_taps(Matrix& taps) {
  auto v = taps.values();
  double mean = 0.0;
  for (double t : v) mean += t;
  mean /= static_cast<double>(v.size());
  double norm = 0.0;
  for (double& t : v) {
    t -= mean;
    norm += t * t;
  }
  norm = std::sqrt(norm);
  require(norm > 0.0, ErrorKind::numerical, "Gabor filter degenerates to a constant");
  for (double& t : v) t /= norm;
}

// Zero-padded copy with `pad` extra pixels on every side.
Matrix pad_image(const GrayImage& img, int pad) {
  Matrix out(img.height() + 2 * pad, img.width() + 2 * pad);
  for (int r = 0; r < img.height(); ++r) {
    auto src = img.matrix().row(r);
    auto dst = out.row(r + pad);
    std::copy(src.begin(), src.end(), dst.begin() + pad);
  }
  return out;
}

void check_fits(const GrayImage& img, int size) {
  require(img.height() >= size && img.width() >= size, ErrorKind::invalid_argument,
          "image " + std::to_string(img.height()) + "x" + std::to_string(img.width()) + " is smaller than the " +
              std::to_string(size) + "x" + std::to_string(size) + " filter");
}

}  // namespace

int filter_size(int scale_index) {
  check_scale(scale_index);
  return 7 + 2 * (scale_index - 1);
}

double orientation_angle(int k) {
  require(k >= 0 && k < kOrientations, ErrorKind::invalid_argument, "orientation index must lie in 0..3");
  return k * std::numbers::pi / 4.0;
}

int orientation_index(double radians) {
  for (int k = 0; k < kOrientations; ++k) {
    if (std::abs(radians - orientation_angle(k)) < 1e-9) return k;
  }
  fail(ErrorKind::invalid_argument, "orientation must be one of 0, pi/4, pi/2, 3pi/4; got " + std::to_string(radians));
}

int band_of_scale(int scale_index) {
  check_scale(scale_index);
  return (scale_index + 1) / 2;
}

GaborGeometry gabor_geometry(int scale_index, const GaborOptions& opts) {
  GaborGeometry g;
  g.size = filter_size(scale_index);
  const double rho = g.size;
  g.gamma = 0.0036 * rho * rho + 0.35 * rho + 0.18;
  g.lambda = g.gamma / 0.8;
  g.sigma = opts.sigma_mode == SigmaMode::lambda_ratio ? 0.3 * g.lambda : 0.3;
  return g;
}

Matrix gabor_taps(int scale_index, double orientation, double aspect, const GaborOptions& opts) {
  orientation_index(orientation);
  const GaborGeometry g = gabor_geometry(scale_index, opts);
  const int half = g.size / 2;
  const double cs = std::cos(orientation);
  const double sn = std::sin(orientation);
  const double two_sigma_sq = 2.0 * g.sigma * g.sigma;
  const double k = 2.0 * std::numbers::pi / g.lambda;

  Matrix taps(g.size, g.size);
  for (int i = 0; i < g.size; ++i) {
    const double y = i - half;
    for (int j = 0; j < g.size; ++j) {
      const double x = j - half;
      const double u = x * cs + y * sn;
      const double v = -x * sn + y * cs;
      taps(i, j) = std::exp(-(u * u + aspect * aspect * v * v) / two_sigma_sq) * std::cos(k * u);
    }
  }
  return taps;
}

GaborFilter make_filter(int scale_index, double orientation, const GaborOptions& opts) {
  const GaborGeometry g = gabor_geometry(scale_index, opts);
  GaborFilter f{g.size, scale_index, orientation, gabor_taps(scale_index, orientation, g.gamma, opts)};
  normalize_taps(f.taps);
  return f;
}

GaborFilter make_isotropic_filter(int scale_index, double orientation, const GaborOptions& opts) {
  GaborFilter f{filter_size(scale_index), scale_index, orientation, gabor_taps(scale_index, orientation, 1.0, opts)};
  normalize_taps(f.taps);
  return f;
}

SeparableGaborFilter make_separable(int scale_index, double orientation, const GaborOptions& opts) {
  orientation_index(orientation);
  const GaborGeometry g = gabor_geometry(scale_index, opts);
  const int half = g.size / 2;
  const double k = 2.0 * std::numbers::pi / g.lambda;
  const double two_sigma_sq = 2.0 * g.sigma * g.sigma;
  const double kx = k * std::cos(orientation);
  const double ky = k * std::sin(orientation);

  SeparableGaborFilter f;
  f.size = g.size;
  f.scale_index = scale_index;
  f.orientation = orientation;
  f.fx.resize(static_cast<std::size_t>(g.size));
  f.gy.resize(static_cast<std::size_t>(g.size));
  for (int t = 0; t < g.size; ++t) {
    const double p = t - half;
    const double envelope = std::exp(-p * p / two_sigma_sq);
    f.fx[static_cast<std::size_t>(t)] = envelope * std::polar(1.0, kx * p);
    f.gy[static_cast<std::size_t>(t)] = envelope * std::polar(1.0, ky * p);
  }

  const Matrix taps = separable_taps(f);
  double mean = 0.0;
  for (double t : taps.values()) mean += t;
  mean /= static_cast<double>(taps.size());
  double norm = 0.0;
  for (double t : taps.values()) norm += (t - mean) * (t - mean);
  f.tap_mean = mean;
  f.tap_norm = std::sqrt(norm);
  require(f.tap_norm > 0.0, ErrorKind::numerical, "separable Gabor filter degenerates to a constant");
  return f;
}

Matrix separable_taps(const SeparableGaborFilter& f) {
  Matrix taps(f.size, f.size);
  for (int i = 0; i < f.size; ++i)
    for (int j = 0; j < f.size; ++j)
      taps(i, j) = (f.gy[static_cast<std::size_t>(i)] * f.fx[static_cast<std::size_t>(j)]).real();
  return taps;
}

GaborBank make_bank(bool separable, const GaborOptions& opts) {
  GaborBank bank;
  bank.separable = separable;
  bank.options = opts;
  for (int s = 1; s <= kScales; ++s) {
    for (int k = 0; k < kOrientations; ++k) {
      const double theta = orientation_angle(k);
      if (separable) {
        bank.dense.push_back(make_isotropic_filter(s, theta, opts));
        bank.factored.push_back(make_separable(s, theta, opts));
      } else {
        bank.dense.push_back(make_filter(s, theta, opts));
      }
    }
  }
  return bank;
}

ResponseMap convolve_dense(const GrayImage& img, const GaborFilter& f) {
  check_fits(img, f.size);
  const int half = f.size / 2;
  const int h = img.height();
  const int w = img.width();
  const Matrix padded = pad_image(img, half);

  ResponseMap out(h, w);
  for (int r = 0; r < h; ++r) {
    double* acc = out.row(r).data();
    for (int i = 0; i < f.size; ++i) {
      const double* src = padded.row(r + i).data();
      for (int j = 0; j < f.size; ++j) {
        const double t = f.taps(i, j);
        const double* s = src + j;
        for (int c = 0; c < w; ++c) acc[c] += t * s[c];
      }
    }
    for (int c = 0; c < w; ++c) acc[c] = std::abs(acc[c]);
  }
  return out;
}

ResponseMap convolve_separable(const GrayImage& img, const SeparableGaborFilter& f) {
  check_fits(img, f.size);
  const int half = f.size / 2;
  const int h = img.height();
  const int w = img.width();
  const int m = f.size;

  std::vector<double> fr(static_cast<std::size_t>(m)), fi(static_cast<std::size_t>(m));
  std::vector<double> gr(static_cast<std::size_t>(m)), gi(static_cast<std::size_t>(m));
  for (std::size_t t = 0; t < static_cast<std::size_t>(m); ++t) {
    fr[t] = f.fx[t].real();
    fi[t] = f.fx[t].imag();
    gr[t] = f.gy[t].real();
    gi[t] = f.gy[t].imag();
  }

  // Row pass: complex response of every image row to fx, plus the row box sum.
  Matrix row_re(h, w), row_im(h, w), row_box(h, w);
  std::vector<double> padded_row(static_cast<std::size_t>(w + 2 * half), 0.0);
  for (int r = 0; r < h; ++r) {
    auto src = img.matrix().row(r);
    std::copy(src.begin(), src.end(), padded_row.begin() + half);
    double* re = row_re.row(r).data();
    double* im = row_im.row(r).data();
    for (int j = 0; j < m; ++j) {
      const double a = fr[static_cast<std::size_t>(j)];
      const double b = fi[static_cast<std::size_t>(j)];
      const double* s = padded_row.data() + j;
      for (int c = 0; c < w; ++c) {
        re[c] += a * s[c];
        im[c] += b * s[c];
      }
    }
    double* box = row_box.row(r).data();
    double run = 0.0;
    for (int c = 0; c < m - 1; ++c) run += padded_row[static_cast<std::size_t>(c)];
    for (int c = 0; c < w; ++c) {
      run += padded_row[static_cast<std::size_t>(c + m - 1)];
      box[c] = run;
      run -= padded_row[static_cast<std::size_t>(c)];
    }
  }

  // Column pass: Re(gy * row response), then undo the mean/norm of the dense filter.
  ResponseMap out(h, w);
  std::vector<double> box(static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    double* acc = out.row(r).data();
    std::fill(box.begin(), box.end(), 0.0);
    const int i_lo = std::max(0, half - r);
    const int i_hi = std::min(m, h - r + half);
    for (int i = i_lo; i < i_hi; ++i) {
      const int src_row = r + i - half;
      const double a = gr[static_cast<std::size_t>(i)];
      const double b = gi[static_cast<std::size_t>(i)];
      const double* re = row_re.row(src_row).data();
      const double* im = row_im.row(src_row).data();
      const double* bs = row_box.row(src_row).data();
      for (int c = 0; c < w; ++c) {
        acc[c] += a * re[c] - b * im[c];
        box[static_cast<std::size_t>(c)] += bs[c];
      }
    }
    const double inv_norm = 1.0 / f.tap_norm;
    for (int c = 0; c < w; ++c) acc[c] = std::abs((acc[c] - f.tap_mean * box[static_cast<std::size_t>(c)]) * inv_norm);
  }
  return out;
}

}  // namespace hmax
