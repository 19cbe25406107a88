#include "hmax/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmax/error.hpp"

namespace hmax {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(std::max(rows, 0)) * std::max(cols, 0), fill) {
  require(rows >= 0 && cols >= 0, ErrorKind::invalid_argument, "matrix dimensions must be non-negative");
}

Matrix::Matrix(int rows, int cols, std::vector<double> values) : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(rows >= 0 && cols >= 0, ErrorKind::invalid_argument, "matrix dimensions must be non-negative");
  require(data_.size() == static_cast<std::size_t>(rows) * cols, ErrorKind::invalid_argument,
          "matrix data length " + std::to_string(data_.size()) + " does not match " + std::to_string(rows) + "x" +
              std::to_string(cols));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::invalid_argument, "max_abs_diff: shape mismatch");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

namespace {

void validate_pixels(const Matrix& m) {
  require(m.rows() >= 1 && m.cols() >= 1, ErrorKind::invalid_argument,
          "image dimensions must be at least 1x1, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  for (double v : m.values()) require(std::isfinite(v), ErrorKind::numerical, "image contains a non-finite value");
}

}  // namespace

GrayImage::GrayImage(int height, int width, std::vector<double> pixels) : pixels_(height, width, std::move(pixels)) {
  validate_pixels(pixels_);
}

GrayImage::GrayImage(Matrix pixels) : pixels_(std::move(pixels)) { validate_pixels(pixels_); }

GrayImage GrayImage::filled(int height, int width, double value) { return GrayImage(Matrix(height, width, value)); }

GrayImage GrayImage::clamped() const {
  Matrix out = pixels_;
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return GrayImage(std::move(out));
}

}  // namespace hmax
