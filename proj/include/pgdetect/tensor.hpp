#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgd {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws std::invalid_argument unless data.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// Batch of multi-channel 1-D signals. Layout: batch, then channel, then position.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t batch, std::size_t channels, std::size_t length, double fill = 0.0);
  Tensor3(std::size_t batch, std::size_t channels, std::size_t length, std::vector<double> data);

  std::size_t batch() const { return batch_; }
  std::size_t channels() const { return channels_; }
  std::size_t length() const { return length_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t b, std::size_t c, std::size_t l) {
    return data_[(b * channels_ + c) * length_ + l];
  }
  double operator()(std::size_t b, std::size_t c, std::size_t l) const {
    return data_[(b * channels_ + c) * length_ + l];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  /// Contiguous slice holding one sample (all channels and positions).
  std::span<const double> sample(std::size_t b) const {
    return {data_.data() + b * channels_ * length_, channels_ * length_};
  }

  /// Same data viewed with a new (channels, length) split; product must match.
  Tensor3 reshaped(std::size_t channels, std::size_t length) const;

  std::string shape_string() const;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

/// Rows of `m` as a (rows, 1, cols) tensor: one single-channel signal per row.
Tensor3 rows_as_signals(const Matrix& m);

}  // namespace pgd
