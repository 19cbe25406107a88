#include "hmax/imgproc.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "hmax/error.hpp"

namespace hmax {

void CombineParams::validate() const {
  require(alpha > 0.0 && alpha <= 2.0, ErrorKind::invalid_argument,
          "alpha must lie in (0, 2], got " + std::to_string(alpha));
  require(c >= 0.0 && c <= 1.0, ErrorKind::invalid_argument, "c must lie in [0, 1], got " + std::to_string(c));
}

void ClaheParams::validate() const {
  require(tile >= 2, ErrorKind::invalid_argument, "CLAHE tile must be >= 2, got " + std::to_string(tile));
  require(clip > 0.0 && clip <= 1.0, ErrorKind::invalid_argument,
          "CLAHE clip must lie in (0, 1], got " + std::to_string(clip));
}

double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

// --- PGM ---------------------------------------------------------------------

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    require(pos_ < bytes_.size() && std::isdigit(bytes_[pos_]), ErrorKind::format, "malformed PGM header");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      require(value < (1L << 30), ErrorKind::format, "PGM header value out of range");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    require(pos_ < bytes_.size() && std::isspace(bytes_[pos_]), ErrorKind::format, "malformed PGM header");
    return pos_ + 1;
  }

  std::size_t pos_ = 2;

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorKind::io, "read failed for " + path.string());
  return bytes;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5', ErrorKind::format, "not a binary PGM (P5) stream");
  PgmHeaderReader reader(bytes);
  const long width = reader.next_int();
  const long height = reader.next_int();
  const long maxval = reader.next_int();
  require(width >= 1 && height >= 1, ErrorKind::format, "PGM has a zero dimension");
  require(maxval >= 1 && maxval <= 65535, ErrorKind::format, "PGM maxval out of range");
  const std::size_t offset = reader.raster_offset();
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  require(bytes.size() - offset >= count * sample_bytes, ErrorKind::format, "PGM raster is truncated");

  std::vector<double> pixels(count);
  const double scale = static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned sample = bytes[offset + i * sample_bytes];
    if (sample_bytes == 2) sample = (sample << 8) | bytes[offset + i * 2 + 1];
    pixels[i] = std::min(1.0, sample / scale);
  }
  return GrayImage(static_cast<int>(height), static_cast<int>(width), std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.values().size());
  for (double v : img.values()) out.push_back(to_byte(v));
  return out;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

// --- PNG ---------------------------------------------------------------------

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorKind::format, std::string("PNG decode failed: ") + image.message);
  }
  require(image.width >= 1 && image.height >= 1, ErrorKind::format, "PNG has a zero dimension");
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(image.width) * image.height * channels);
  if (!png_image_finish_read(&image, nullptr, raster.data(), 0, nullptr)) {
    fail(ErrorKind::format, std::string("PNG decode failed: ") + image.message);
  }

  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  std::vector<double> pixels(count);
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = color ? luminance(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]) : raster[i] / 255.0;
  }
  return GrayImage(static_cast<int>(image.height), static_cast<int>(image.width), std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  PngImageGuard guard{&image};

  std::vector<std::uint8_t> raster;
  raster.reserve(img.values().size());
  for (double v : img.values()) raster.push_back(to_byte(v));

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.data(), 0, nullptr)) {
    fail(ErrorKind::format, std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data(), 0, nullptr)) {
    fail(ErrorKind::format, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) return decode_jpeg(bytes);
  fail(ErrorKind::format, "unsupported image format (expected PNG, JPEG or binary PGM)");
}

GrayImage load_grayscale(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// --- resize ------------------------------------------------------------------

GrayImage resize_height(const GrayImage& img, int target_h) {
  require(target_h >= 1, ErrorKind::invalid_argument, "target height must be >= 1");
  const int src_h = img.height();
  const int src_w = img.width();
  const int target_w =
      std::max(1, static_cast<int>(std::lround(static_cast<double>(src_w) * target_h / src_h)));
  if (target_h == src_h && target_w == src_w) return img;

  // Pixel-centre alignment: dst centre (i + 0.5) maps to src centre (i + 0.5) * scale.
  const double sy = static_cast<double>(src_h) / target_h;
  const double sx = static_cast<double>(src_w) / target_w;

  struct Tap {
    int lo, hi;
    double t;
  };
  auto taps = [](int dst, double scale, int src) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    for (int i = 0; i < dst; ++i) {
      const double f = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
      const int lo = static_cast<int>(std::floor(f));
      const int hi = std::min(lo + 1, src - 1);
      out[static_cast<std::size_t>(i)] = {lo, hi, f - lo};
    }
    return out;
  };
  const auto ty = taps(target_h, sy, src_h);
  const auto tx = taps(target_w, sx, src_w);

  Matrix out(target_h, target_w);
  for (int r = 0; r < target_h; ++r) {
    const Tap& y = ty[static_cast<std::size_t>(r)];
    for (int c = 0; c < target_w; ++c) {
      const Tap& x = tx[static_cast<std::size_t>(c)];
      const double top = img(y.lo, x.lo) + x.t * (img(y.lo, x.hi) - img(y.lo, x.lo));
      const double bottom = img(y.hi, x.lo) + x.t * (img(y.hi, x.hi) - img(y.hi, x.lo));
      out(r, c) = top + y.t * (bottom - top);
    }
  }
  return GrayImage(std::move(out));
}

// --- CLAHE -------------------------------------------------------------------

namespace {

constexpr int kBins = 256;
using Lut = std::array<double, kBins>;

int intensity_bin(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * (kBins - 1))); }

// Clip each bin at `limit` counts, spread the excess uniformly, and return the
// normalized CDF as the intensity mapping.
Lut tile_mapping(const std::array<double, kBins>& hist, double area, double limit) {
  std::array<double, kBins> clipped{};
  double excess = 0.0;
  for (int b = 0; b < kBins; ++b) {
    clipped[b] = std::min(hist[b], limit);
    excess += hist[b] - clipped[b];
  }
  const double share = excess / kBins;
  Lut lut{};
  double cdf = 0.0;
  for (int b = 0; b < kBins; ++b) {
    cdf += clipped[b] + share;
    lut[b] = std::min(1.0, cdf / area);
  }
  return lut;
}

struct TileAxis {
  std::vector<int> start;  // tile boundaries, size = count + 1
  std::vector<double> centre;
};

// Floor division; the last tile absorbs the remainder.
TileAxis tile_axis(int extent, int tile) {
  const int count = std::max(1, extent / tile);
  TileAxis axis;
  for (int i = 0; i < count; ++i) axis.start.push_back(i * tile);
  axis.start.push_back(extent);
  for (int i = 0; i < count; ++i) axis.centre.push_back(0.5 * (axis.start[i] + axis.start[i + 1]) - 0.5);
  return axis;
}

struct Blend {
  int lo, hi;
  double t;
};

Blend blend_position(const TileAxis& axis, int p) {
  const auto& c = axis.centre;
  const int n = static_cast<int>(c.size());
  if (n == 1 || p <= c.front()) return {0, 0, 0.0};
  if (p >= c.back()) return {n - 1, n - 1, 0.0};
  int lo = 0;
  while (lo + 1 < n && c[lo + 1] <= p) ++lo;
  const int hi = lo + 1;
  return {lo, hi, (p - c[lo]) / (c[hi] - c[lo])};
}

}  // namespace

GrayImage adaptive_hist_eq(const GrayImage& img, int tile, double clip) {
  ClaheParams{tile, clip}.validate();
  const int h = img.height();
  const int w = img.width();

  const auto values = img.values();
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) return img;

  if (h < tile || w < tile) {
    std::array<double, kBins> hist{};
    for (double v : values) hist[intensity_bin(v)] += 1.0;
    const double area = static_cast<double>(values.size());
    const Lut lut = tile_mapping(hist, area, area);
    Matrix out(h, w);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) out(r, c) = lut[intensity_bin(img(r, c))];
    return GrayImage(std::move(out));
  }

  const TileAxis ay = tile_axis(h, tile);
  const TileAxis ax = tile_axis(w, tile);
  const int ny = static_cast<int>(ay.centre.size());
  const int nx = static_cast<int>(ax.centre.size());

  std::vector<Lut> luts(static_cast<std::size_t>(ny) * nx);
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      std::array<double, kBins> hist{};
      for (int r = ay.start[ty]; r < ay.start[ty + 1]; ++r)
        for (int c = ax.start[tx]; c < ax.start[tx + 1]; ++c) hist[intensity_bin(img(r, c))] += 1.0;
      const double area =
          static_cast<double>(ay.start[ty + 1] - ay.start[ty]) * (ax.start[tx + 1] - ax.start[tx]);
      luts[static_cast<std::size_t>(ty) * nx + tx] = tile_mapping(hist, area, clip * area);
    }
  }

  std::vector<Blend> bx(static_cast<std::size_t>(w));
  for (int c = 0; c < w; ++c) bx[static_cast<std::size_t>(c)] = blend_position(ax, c);

  Matrix out(h, w);
  for (int r = 0; r < h; ++r) {
    const Blend by = blend_position(ay, r);
    for (int c = 0; c < w; ++c) {
      const Blend& b = bx[static_cast<std::size_t>(c)];
      const int bin = intensity_bin(img(r, c));
      auto at = [&](int ty, int tx) { return luts[static_cast<std::size_t>(ty) * nx + tx][bin]; };
      const double top = (1.0 - b.t) * at(by.lo, b.lo) + b.t * at(by.lo, b.hi);
      const double bottom = (1.0 - b.t) * at(by.hi, b.lo) + b.t * at(by.hi, b.hi);
      out(r, c) = std::clamp((1.0 - by.t) * top + by.t * bottom, 0.0, 1.0);
    }
  }
  return GrayImage(std::move(out));
}

GrayImage adaptive_hist_eq(const GrayImage& img, const ClaheParams& params) {
  return adaptive_hist_eq(img, params.tile, params.clip);
}

// --- SVD reconstruction ------------------------------------------------------

GrayImage svd_magnify(const GrayImage& img, double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::invalid_argument, "alpha must be positive");
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> a(img.values().data(), img.height(), img.width());

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  require(svd.info() == Eigen::Success, ErrorKind::numerical, "SVD failed to converge");

  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  Eigen::VectorXd s = svd.singularValues();

  // Largest-magnitude entry of each left singular vector is made positive.
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    u.col(k).cwiseAbs().maxCoeff(&arg);
    if (u(arg, k) < 0.0) {
      u.col(k) = -u.col(k);
      v.col(k) = -v.col(k);
    }
  }
  for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = s(k) > 0.0 ? std::pow(s(k), alpha) : 0.0;

  const RowMatrix out = u * s.asDiagonal() * v.transpose();
  std::vector<double> pixels(out.data(), out.data() + out.size());
  return GrayImage(img.height(), img.width(), std::move(pixels));
}

GrayImage svd_reconstruct(const GrayImage& img, double alpha) { return svd_magnify(img, alpha).clamped(); }

// --- combination -------------------------------------------------------------

GrayImage combine(const GrayImage& adapted, const GrayImage& reconstructed, double c) {
  require(adapted.height() == reconstructed.height() && adapted.width() == reconstructed.width(),
          ErrorKind::invalid_argument, "combine: image dimensions differ");
  require(c >= 0.0 && c <= 1.0, ErrorKind::invalid_argument, "combine: c must lie in [0, 1]");
  Matrix out(adapted.height(), adapted.width());
  const auto a = adapted.values();
  const auto r = reconstructed.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (a[i] + c * r[i]) / (1.0 + c);
  return GrayImage(std::move(out));
}

GrayImage combined_image(const GrayImage& img, const CombineParams& params, const ClaheParams& clahe) {
  params.validate();
  const GrayImage adapted = adaptive_hist_eq(img, clahe);
  const GrayImage reconstructed = svd_reconstruct(adapted, params.alpha);
  return combine(adapted, reconstructed, params.c);
}

}  // namespace hmax
