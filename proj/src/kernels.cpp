#include "regionfac/kernels.hpp"

#include <algorithm>

#include <omp.h>

#include "regionfac/error.hpp"

namespace regionfac::kernels {

namespace {

// Rows of the streamed operand processed per pass; 64 rows of a 1024-wide
// matrix stay within L2.
constexpr std::size_t kTile = 64;

// out(i, j) += sum_r lhs(r, i) * rhs(r, j) for r ascending, j in [j_begin(i), cols).
// lhs is read column-wise (one scalar per row), rhs row-wise.
template <bool UpperOnly>
void accumulate_tn(const Matrix& lhs, const Matrix& rhs, Matrix& out) {
  const std::size_t inner = lhs.rows();
  const std::size_t n = lhs.cols();
  const std::size_t q = rhs.cols();
  const double* lhs_data = lhs.data().data();
  const double* rhs_data = rhs.data().data();
  double* out_data = out.data().data();
  const std::ptrdiff_t n_signed = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel
  for (std::size_t r0 = 0; r0 < inner; r0 += kTile) {
    const std::size_t r1 = std::min(inner, r0 + kTile);
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t is = 0; is < n_signed; ++is) {
      const auto i = static_cast<std::size_t>(is);
      const std::size_t j0 = UpperOnly ? i : 0;
      double* __restrict oi = out_data + i * q;
      for (std::size_t r = r0; r < r1; ++r) {
        const double lri = lhs_data[r * n + i];
        const double* __restrict rr = rhs_data + r * q;
        for (std::size_t j = j0; j < q; ++j) oi[j] += lri * rr[j];
      }
    }
  }
}

}  // namespace

int max_threads() noexcept { return omp_get_max_threads(); }

Matrix gram(const Matrix& m) {
  const std::size_t n = m.cols();
  Matrix g(n, n);
  accumulate_tn<true>(m, m, g);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) g(j, i) = g(i, j);
  }
  return g;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul_tn inner size");
  Matrix c(a.cols(), b.cols());
  accumulate_tn<false>(a, b, c);
  return c;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul inner size");
  const std::size_t m = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t q = b.cols();
  Matrix c(m, q);
  const double* a_data = a.data().data();
  const double* b_data = b.data().data();
  double* c_data = c.data().data();
  const std::ptrdiff_t m_signed = static_cast<std::ptrdiff_t>(m);

#pragma omp parallel
  for (std::size_t k0 = 0; k0 < inner; k0 += kTile) {
    const std::size_t k1 = std::min(inner, k0 + kTile);
#pragma omp for schedule(static)
    for (std::ptrdiff_t is = 0; is < m_signed; ++is) {
      const auto i = static_cast<std::size_t>(is);
      double* __restrict ci = c_data + i * q;
      for (std::size_t k = k0; k < k1; ++k) {
        const double aik = a_data[i * inner + k];
        const double* __restrict bk = b_data + k * q;
        for (std::size_t j = 0; j < q; ++j) ci[j] += aik * bk[j];
      }
    }
  }
  return c;
}

namespace reference {

Matrix gram(const Matrix& m) {
  const std::size_t n = m.cols();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul inner size");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul_tn inner size");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b(r, j);
      c(i, j) = s;
    }
  }
  return c;
}

}  // namespace reference

}  // namespace regionfac::kernels
