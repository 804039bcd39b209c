#include "pgdetect/tensor.hpp"

#include <stdexcept>

namespace pgd {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_string());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_string() + " * " +
                                b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Tensor3::Tensor3(std::size_t batch, std::size_t channels, std::size_t length, double fill)
    : batch_(batch), channels_(channels), length_(length), data_(batch * channels * length, fill) {}

Tensor3::Tensor3(std::size_t batch, std::size_t channels, std::size_t length,
                 std::vector<double> data)
    : batch_(batch), channels_(channels), length_(length), data_(std::move(data)) {
  if (data_.size() != batch * channels * length) {
    throw std::invalid_argument("Tensor3: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_string());
  }
}

Tensor3 Tensor3::reshaped(std::size_t channels, std::size_t length) const {
  if (channels * length != channels_ * length_) {
    throw std::invalid_argument("Tensor3::reshaped: cannot view " + shape_string() + " as " +
                                std::to_string(channels) + "x" + std::to_string(length));
  }
  return Tensor3(batch_, channels, length, data_);
}

std::string Tensor3::shape_string() const {
  return "(" + std::to_string(batch_) + "x" + std::to_string(channels_) + "x" +
         std::to_string(length_) + ")";
}

Tensor3 rows_as_signals(const Matrix& m) {
  return Tensor3(m.rows(), 1, m.cols(), std::vector<double>(m.data().begin(), m.data().end()));
}

}  // namespace pgd
