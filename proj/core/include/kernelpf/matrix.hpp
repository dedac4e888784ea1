#pragma once

#include <cstddef>
#include <vector>

#include "kernelpf/errors.hpp"

namespace kernelpf {

/// Minimal dense row-major matrix. Kernels here are small (finite type
/// spaces of a few states, or quadrature grids of a few hundred nodes), so
/// plain loops are all that is needed.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw dimension_mismatch("ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  static Matrix outer(const std::vector<double>& u, const std::vector<double>& v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  /// y = A x
  std::vector<double> apply(const std::vector<double>& x) const {
    if (x.size() != cols_) throw dimension_mismatch("matrix-vector size mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double acc = 0.0;
      const double* row = &data_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
    return y;
  }

  /// y = A^T x  (measure/adjoint side)
  std::vector<double> apply_transposed(const std::vector<double>& x) const {
    if (x.size() != rows_) throw dimension_mismatch("vector-matrix size mismatch");
    std::vector<double> y(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* row = &data_[i * cols_];
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) y[j] += xi * row[j];
    }
    return y;
  }

  Matrix multiply(const Matrix& other) const {
    if (cols_ != other.rows_) throw dimension_mismatch("matrix product size mismatch");
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < other.cols_; ++j)
          out(i, j) += aik * other(k, j);
      }
    return out;
  }

  Matrix& operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
      throw dimension_mismatch("matrix sum size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Matrix& operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
      throw dimension_mismatch("matrix difference size mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }

  Matrix power(unsigned n) const {
    Matrix result = identity(rows_);
    for (unsigned k = 0; k < n; ++k) result = result.multiply(*this);
    return result;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw dimension_mismatch("dot product size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace kernelpf
