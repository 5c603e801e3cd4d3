#include "regionfac/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "regionfac/error.hpp"

namespace regionfac {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) throw Error(ErrorCode::NonFiniteValue, "matrix contains NaN or Inf");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::DimensionMismatch, "ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> Matrix::column_copy(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

double Matrix::frobenius_norm() const noexcept { return norm2(data_); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

SymmetricMatrix::SymmetricMatrix(Matrix source) : full_(std::move(source)) {
  if (full_.rows() != full_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  }
  const std::size_t n = full_.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) full_(j, i) = full_(i, j);
  }
}

double SymmetricMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += full_(i, i);
  return t;
}

SymmetricMatrix SymmetricMatrix::shifted(double shift) const {
  SymmetricMatrix out = *this;
  for (std::size_t i = 0; i < dim(); ++i) out.full_(i, i) += shift;
  return out;
}

SymmetricMatrix SymmetricMatrix::scaled(double factor) const {
  SymmetricMatrix out = *this;
  for (double& v : out.full_.data()) v *= factor;
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
  }
}
}  // namespace

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix operator*(double s, const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data()) v *= s;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) noexcept {
  // Scaled accumulation avoids overflow for large entries.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : v) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

std::vector<double> multiply(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector size");
  std::vector<double> y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

std::vector<double> multiply(const SymmetricMatrix& m, std::span<const double> x) {
  return multiply(m.matrix(), x);
}

double quadratic_form(const SymmetricMatrix& m, std::span<const double> x) {
  const auto y = multiply(m, x);
  return dot(x, y);
}

}  // namespace regionfac
