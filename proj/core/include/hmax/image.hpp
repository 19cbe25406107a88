#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hmax {

/// Dense row-major matrix of doubles. Used for filter taps and response maps.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> values);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// S1/S2 response planes share the matrix layout.
using ResponseMap = Matrix;

/// Largest absolute elementwise difference; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Grayscale image with intensities nominally in [0,1].
///
/// Construction enforces non-zero dimensions and finite values. The [0,1]
/// range is not enforced here because SVD magnification produces transient
/// out-of-range values; `clamped()` restores it.
class GrayImage {
 public:
  GrayImage(int height, int width, std::vector<double> pixels);
  explicit GrayImage(Matrix pixels);

  static GrayImage filled(int height, int width, double value);

  int height() const noexcept { return pixels_.rows(); }
  int width() const noexcept { return pixels_.cols(); }

  double operator()(int r, int c) const { return pixels_(r, c); }
  std::span<const double> values() const noexcept { return pixels_.values(); }
  const Matrix& matrix() const noexcept { return pixels_; }

  GrayImage clamped() const;

  bool operator==(const GrayImage&) const = default;

 private:
  Matrix pixels_;
};

}  // namespace hmax
