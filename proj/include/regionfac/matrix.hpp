#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace regionfac {

/// Dense row-major matrix of doubles. Entries are validated finite when the
/// matrix is built from external data; zero-initialized matrices are
/// filled in place by the kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix diagonal(std::span<const double> values);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column_copy(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  double frobenius_norm() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square symmetric matrix. Built from the upper triangle of its source;
/// the lower triangle is a mirror, so M(i,j) == M(j,i) holds exactly.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim) : full_(dim, dim) {}
  explicit SymmetricMatrix(Matrix source);

  static SymmetricMatrix identity(std::size_t n) { return SymmetricMatrix(Matrix::identity(n)); }
  static SymmetricMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    return SymmetricMatrix(Matrix::from_rows(rows));
  }

  std::size_t dim() const noexcept { return full_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return full_(i, j); }
  const Matrix& matrix() const noexcept { return full_; }

  double trace() const noexcept;
  double frobenius_norm() const noexcept { return full_.frobenius_norm(); }

  /// Returns M + shift * I.
  SymmetricMatrix shifted(double shift) const;
  SymmetricMatrix scaled(double factor) const;

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  Matrix full_;
};

Matrix transpose(const Matrix& m);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> v) noexcept;
/// y = M x
std::vector<double> multiply(const Matrix& m, std::span<const double> x);
std::vector<double> multiply(const SymmetricMatrix& m, std::span<const double> x);
/// x^T M x
double quadratic_form(const SymmetricMatrix& m, std::span<const double> x);

}  // namespace regionfac
