#include "regionfac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "regionfac/error.hpp"
#include "regionfac/kernels.hpp"

namespace regionfac {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_nonempty_square(const SymmetricMatrix& m) {
  if (m.dim() == 0) throw Error(ErrorCode::EmptyMatrix, "matrix has dimension zero");
  if (!m.matrix().all_finite()) throw Error(ErrorCode::NonFiniteValue, "matrix contains NaN or Inf");
}

// Packs eigenvectors stored as rows of `rows` into columns, ordered by
// descending eigenvalue.
EigenPairs sorted_pairs(std::vector<double> values, const Matrix& rows) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  EigenPairs out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = values[order[j]];
    const auto src = rows.row(order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = src[k];
  }
  return out;
}

// Householder reduction to tridiagonal form (EISPACK tred2), operating on the
// transpose of the usual column layout so that every inner loop is a
// contiguous row sweep. On return w's rows hold the accumulated
// orthogonal transformation, d the diagonal and e the subdiagonal.
void tridiagonalize(Matrix& w, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = w.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = w(j, n - 1);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = w(j, i - 1);
        w(j, i) = 0.0;
        w(i, j) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        w(i, j) = f;
        const double* wj = w.row(j).data();
        g = e[j] + wj[j] * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += wj[k] * d[k];
          e[k] += wj[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* wj = w.row(j).data();
        for (std::size_t k = j; k < i; ++k) wj[k] -= (f * e[k] + g * d[k]);
        d[j] = wj[i - 1];
        wj[i] = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    w(i, n - 1) = w(i, i);
    w(i, i) = 1.0;
    const double h = d[i + 1];
    double* wnext = w.row(i + 1).data();
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = wnext[k] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double* wj = w.row(j).data();
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += wnext[k] * wj[k];
        for (std::size_t k = 0; k <= i; ++k) wj[k] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) wnext[k] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = w(j, n - 1);
    w(j, n - 1) = 0.0;
  }
  w(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e) (EISPACK tql2), accumulating the
// rotations into the rows of w.
void tridiagonal_ql(Matrix& w, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = w.rows();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  constexpr int kMaxIterationsPerValue = 60;
  double f = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= kEps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxIterationsPerValue) {
          throw Error(ErrorCode::ConvergenceFailure,
                      "tridiagonal QL did not converge for eigenvalue " + std::to_string(l), l,
                      std::abs(e[l]));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          double* wi = w.row(ii).data();
          double* wi1 = w.row(ii + 1).data();
          for (std::size_t k = 0; k < n; ++k) {
            const double t = wi1[k];
            wi1[k] = s * wi[k] + c * t;
            wi[k] = c * wi[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > kEps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

void require_regularizer(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorCode::InvalidRegularizer, "regularizer a must be positive and finite", std::nullopt,
                a);
  }
}

void require_factor_shapes(const Matrix& basis, std::span<const double> singular_values) {
  if (basis.cols() != singular_values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "basis columns != number of singular values");
  }
}

// rows(V^T X) scaled by weights, then V times that: V diag(w) V^T X.
Matrix low_rank_product(const Matrix& basis, std::span<const double> weights, const Matrix& x) {
  if (x.rows() != basis.rows()) throw Error(ErrorCode::DimensionMismatch, "operand rows != K");
  if (basis.cols() == 0) return Matrix(x.rows(), x.cols());
  Matrix projected = kernels::matmul_tn(basis, x);
  for (std::size_t i = 0; i < projected.rows(); ++i) {
    for (double& v : projected.row(i)) v *= weights[i];
  }
  return kernels::matmul(basis, projected);
}

// 1 - 1/sqrt(1 + d^2/a) per singular value, without cancellation.
std::vector<double> inverse_sqrt_shrink(std::span<const double> singular_values, double a) {
  std::vector<double> shrink;
  shrink.reserve(singular_values.size());
  for (double s : singular_values) {
    const double u = s * s / a;
    const double q = std::sqrt(1.0 + u);
    shrink.push_back(u / (q * (q + 1.0)));
  }
  return shrink;
}

}  // namespace

EigenPairs sym_eigendecompose(const SymmetricMatrix& m, EigenSolver solver) {
  if (solver == EigenSolver::Jacobi) return sym_eigendecompose_jacobi(m);
  require_nonempty_square(m);
  const std::size_t n = m.dim();
  Matrix w = m.matrix();
  std::vector<double> d(n);
  std::vector<double> e(n);
  tridiagonalize(w, d, e);
  tridiagonal_ql(w, d, e);
  return sorted_pairs(std::move(d), w);
}

EigenPairs sym_eigendecompose_jacobi(const SymmetricMatrix& m, JacobiSettings settings) {
  require_nonempty_square(m);
  const std::size_t n = m.dim();
  Matrix a = m.matrix();
  // Rows of v are eigenvectors.
  Matrix v = Matrix::identity(n);
  const double target = settings.tolerance * m.frobenius_norm();

  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > target) {
    if (sweep++ >= settings.max_sweeps) {
      throw Error(ErrorCode::ConvergenceFailure,
                  "Jacobi did not converge in " + std::to_string(settings.max_sweeps) + " sweeps",
                  std::nullopt, off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::hypot(theta, 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        double* ap = a.row(p).data();
        double* aq = a.row(q).data();
        double* vp = v.row(p).data();
        double* vq = v.row(q).data();
        for (std::size_t k = 0; k < n; ++k) {
          const double x = ap[k];
          const double y = aq[k];
          ap[k] = c * x - s * y;
          aq[k] = s * x + c * y;
          const double vx = vp[k];
          const double vy = vq[k];
          vp[k] = c * vx - s * vy;
          vq[k] = s * vx + c * vy;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    off = off_diagonal_norm(a);
  }

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  return sorted_pairs(std::move(values), v);
}

Matrix cholesky(const SymmetricMatrix& m) {
  require_nonempty_square(m);
  const std::size_t n = m.dim();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      const auto lj = l.row(j);
      const double s = m(i, j) - dot(li.first(j), lj.first(j));
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) {
          throw Error(ErrorCode::NotPositiveDefinite,
                      "non-positive pivot at index " + std::to_string(i), i, s);
        }
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return l;
}

namespace {
void require_triangular_system(const Matrix& lower, const Matrix& rhs) {
  if (lower.rows() != lower.cols()) throw Error(ErrorCode::DimensionMismatch, "L must be square");
  if (rhs.rows() != lower.rows()) throw Error(ErrorCode::DimensionMismatch, "rhs rows != dim(L)");
  for (std::size_t i = 0; i < lower.rows(); ++i) {
    if (lower(i, i) == 0.0) {
      throw Error(ErrorCode::SingularTriangular, "zero diagonal at index " + std::to_string(i), i);
    }
  }
}
}  // namespace

Matrix solve_lower_triangular(const Matrix& lower, const Matrix& rhs) {
  require_triangular_system(lower, rhs);
  Matrix x = rhs;
  const std::size_t n = lower.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = lower(i, k);
      if (lik == 0.0) continue;
      const double* xk = x.row(k).data();
      for (std::size_t j = 0; j < x.cols(); ++j) xi[j] -= lik * xk[j];
    }
    const double inv = 1.0 / lower(i, i);
    for (std::size_t j = 0; j < x.cols(); ++j) xi[j] *= inv;
  }
  return x;
}

Matrix solve_lower_transposed(const Matrix& lower, const Matrix& rhs) {
  require_triangular_system(lower, rhs);
  Matrix x = rhs;
  const std::size_t n = lower.rows();
  for (std::size_t i = n; i-- > 0;) {
    double* xi = x.row(i).data();
    for (std::size_t k = i + 1; k < n; ++k) {
      const double lki = lower(k, i);
      if (lki == 0.0) continue;
      const double* xk = x.row(k).data();
      for (std::size_t j = 0; j < x.cols(); ++j) xi[j] -= lki * xk[j];
    }
    const double inv = 1.0 / lower(i, i);
    for (std::size_t j = 0; j < x.cols(); ++j) xi[j] *= inv;
  }
  return x;
}

PivotedCholesky pivoted_cholesky(const SymmetricMatrix& m, double tolerance) {
  const std::size_t n = m.dim();
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = m(i, i);
  const double max_diag = n == 0 ? 0.0 : *std::max_element(residual.begin(), residual.end());
  std::vector<bool> chosen(n, false);
  std::vector<double> rows;  // rank x n, row-major
  std::size_t rank = 0;
  if (max_diag > 0.0) {
    const double stop = tolerance * max_diag;
    while (rank < n) {
      std::size_t p = n;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i] && residual[i] > best) {
          best = residual[i];
          p = i;
        }
      }
      if (p == n || !(best > stop)) break;
      std::vector<double> next(m.matrix().row(p).begin(), m.matrix().row(p).end());
      for (std::size_t t = 0; t < rank; ++t) {
        const double* rt = rows.data() + t * n;
        const double coeff = rt[p];
        for (std::size_t j = 0; j < n; ++j) next[j] -= coeff * rt[j];
      }
      const double inv = 1.0 / std::sqrt(best);
      for (std::size_t j = 0; j < n; ++j) next[j] = chosen[j] ? 0.0 : next[j] * inv;
      next[p] = std::sqrt(best);
      chosen[p] = true;
      for (std::size_t j = 0; j < n; ++j) residual[j] -= next[j] * next[j];
      rows.insert(rows.end(), next.begin(), next.end());
      ++rank;
    }
  }
  PivotedCholesky out;
  out.rank = rank;
  out.factor = Matrix(rank, n);
  std::copy(rows.begin(), rows.end(), out.factor.data().begin());
  return out;
}

void orthonormalize_columns(Matrix& m) {
  Matrix t = transpose(m);
  const std::size_t cols = t.rows();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < cols; ++j) {
      auto tj = t.row(j);
      for (std::size_t k = 0; k < j; ++k) {
        const auto tk = t.row(k);
        const double proj = dot(tk, tj);
        for (std::size_t i = 0; i < tj.size(); ++i) tj[i] -= proj * tk[i];
      }
      const double nrm = norm2(tj);
      if (nrm > 0.0) {
        for (double& v : tj) v /= nrm;
      }
    }
  }
  m = transpose(t);
}

SvdFactors thin_svd(const Matrix& m, double rank_tolerance, SvdOptions options) {
  if (!(rank_tolerance >= 0.0) || !std::isfinite(rank_tolerance)) {
    throw Error(ErrorCode::InvalidArgument, "rank_tolerance must be finite and non-negative");
  }
  if (!m.all_finite()) throw Error(ErrorCode::NonFiniteValue, "matrix contains NaN or Inf");
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  SvdFactors out;
  out.left = Matrix(rows, 0);
  out.right = Matrix(cols, 0);
  if (rows == 0 || cols == 0) return out;

  // Eigen-decompose a small Gram matrix whose eigenvalues are D^2 and whose
  // eigenvectors map to one side of the SVD through `mapped`.
  EigenPairs eig;
  bool wide = rows <= cols;
  Matrix reduced_factor;  // R with M^T M ~= R^T R (tall case only)
  if (wide) {
    eig = sym_eigendecompose(SymmetricMatrix(kernels::gram(transpose(m))));
  } else {
    const SymmetricMatrix g(kernels::gram(m));
    PivotedCholesky pc = pivoted_cholesky(g, static_cast<double>(cols) * kEps);
    if (pc.rank == 0) return out;
    reduced_factor = std::move(pc.factor);
    eig = sym_eigendecompose(SymmetricMatrix(kernels::gram(transpose(reduced_factor))));
  }

  const double top = eig.values.empty() ? 0.0 : eig.values.front();
  if (!(top > 0.0)) return out;
  const double d_max = std::sqrt(top);
  // Gram eigenvalues at this level are round-off, so singular values below
  // sqrt(n eps) * d_max cannot be resolved and are dropped whatever the tolerance.
  const double noise_floor = static_cast<double>(eig.values.size()) * kEps * top;
  std::vector<double> d;
  for (double lambda : eig.values) {
    if (!(lambda > noise_floor)) break;
    const double s = std::sqrt(lambda);
    if (s < rank_tolerance * d_max) break;
    d.push_back(s);
  }
  const std::size_t r = d.size();
  Matrix basis(eig.vectors.rows(), r);
  for (std::size_t i = 0; i < basis.rows(); ++i) {
    for (std::size_t j = 0; j < r; ++j) basis(i, j) = eig.vectors(i, j);
  }

  auto scale_columns = [&](Matrix& x) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto row = x.row(i);
      for (std::size_t j = 0; j < r; ++j) row[j] /= d[j];
    }
  };

  if (wide) {
    Matrix right = kernels::matmul_tn(m, basis);
    scale_columns(right);
    orthonormalize_columns(right);
    orthonormalize_columns(basis);
    out.right = std::move(right);
    if (options.want_left) out.left = std::move(basis);
  } else {
    Matrix right = kernels::matmul_tn(reduced_factor, basis);
    scale_columns(right);
    orthonormalize_columns(right);
    if (options.want_left) {
      Matrix left = kernels::matmul(m, right);
      scale_columns(left);
      orthonormalize_columns(left);
      out.left = std::move(left);
    }
    out.right = std::move(right);
  }
  out.singular_values = std::move(d);
  out.rank = r;
  return out;
}

WoodburyFactors woodbury_inverse_factors(const Matrix& basis, std::span<const double> singular_values,
                                         double a) {
  require_regularizer(a);
  require_factor_shapes(basis, singular_values);
  WoodburyFactors f;
  f.scale = 1.0 / a;
  f.basis = basis;
  f.dtilde.reserve(singular_values.size());
  for (double s : singular_values) f.dtilde.push_back(s * s / (a + s * s));
  return f;
}

Matrix apply_woodbury_inverse(const WoodburyFactors& factors, const Matrix& x) {
  Matrix out = x - low_rank_product(factors.basis, factors.dtilde, x);
  for (double& v : out.data()) v *= factors.scale;
  return out;
}

Matrix apply_inverse_sqrt(const Matrix& basis, std::span<const double> singular_values, double a,
                          const Matrix& x) {
  require_regularizer(a);
  require_factor_shapes(basis, singular_values);
  const std::vector<double> shrink = inverse_sqrt_shrink(singular_values, a);
  Matrix out = x - low_rank_product(basis, shrink, x);
  const double factor = 1.0 / std::sqrt(a);
  for (double& v : out.data()) v *= factor;
  return out;
}

// With S = diag(shrink), P = V^T X and Q = P V:
// (I - V S V^T) X (I - V S V^T) = X - (G + G^T),  G = V (S P - S Q S V^T / 2).
SymmetricMatrix inverse_sqrt_congruence(const Matrix& basis, std::span<const double> singular_values, double a,
                                        const SymmetricMatrix& x) {
  require_regularizer(a);
  require_factor_shapes(basis, singular_values);
  const std::size_t n = x.dim();
  if (basis.rows() != n) throw Error(ErrorCode::DimensionMismatch, "operand rows != K");
  const std::size_t r = basis.cols();
  const double factor = 1.0 / a;
  if (r == 0) return x.scaled(factor);

  const std::vector<double> shrink = inverse_sqrt_shrink(singular_values, a);
  Matrix p = kernels::matmul_tn(basis, x.matrix());
  Matrix q = kernels::matmul(p, basis);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) q(i, j) *= 0.5 * shrink[i] * shrink[j];
  }
  const Matrix correction = kernels::matmul(q, transpose(basis));
  for (std::size_t i = 0; i < r; ++i) {
    double* pi = p.row(i).data();
    const double* ci = correction.row(i).data();
    for (std::size_t j = 0; j < n; ++j) pi[j] = shrink[i] * pi[j] - ci[j];
  }
  const Matrix g = kernels::matmul(basis, p);

  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = factor * (x(i, j) - (g(i, j) + g(j, i)));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return SymmetricMatrix(std::move(out));
}

Matrix apply_low_rank_plus_shift(const Matrix& basis, std::span<const double> singular_values,
                                 double a, const Matrix& x) {
  require_factor_shapes(basis, singular_values);
  std::vector<double> squares;
  squares.reserve(singular_values.size());
  for (double s : singular_values) squares.push_back(s * s);
  return low_rank_product(basis, squares, x) + a * x;
}

}  // namespace regionfac
