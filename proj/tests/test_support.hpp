#pragma once

// Test-only oracles and fixture builders. Nothing here calls the
// factorization or eigen routines it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "regionfac/factorizer.hpp"
#include "regionfac/generators.hpp"
#include "regionfac/matrix.hpp"
#include "regionfac/regions.hpp"

namespace regionfac::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev = 1.0) {
  return Matrix(rows, cols, normal_vector(rng, rows * cols, stddev));
}

inline std::vector<double> random_unit(Rng& rng, std::size_t n) {
  auto v = normal_vector(rng, n);
  const double nrm = norm2(v);
  for (double& x : v) x /= nrm;
  return v;
}

/// Naive M^T M, independent of the kernels.
inline Matrix naive_gram(const Matrix& m) {
  Matrix g(m.cols(), m.cols());
  for (std::size_t i = 0; i < m.cols(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      g(i, j) = s;
    }
  }
  return g;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
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

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// Random SPD matrix G^T G + shift I.
inline SymmetricMatrix random_spd(Rng& rng, std::size_t n, double shift = 0.1) {
  const Matrix g = random_matrix(rng, n + 2, n);
  Matrix s = naive_gram(g);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += shift;
  return SymmetricMatrix(std::move(s));
}

/// Central finite-difference Jacobian of a generator.
inline Matrix finite_difference_jacobian(const ToyGenerator& g, const LatentCode& z, double step = 1e-5) {
  Matrix j(g.pixel_count(), g.latent_dim());
  for (std::size_t k = 0; k < g.latent_dim(); ++k) {
    LatentCode plus = z;
    LatentCode minus = z;
    plus[k] += step;
    minus[k] -= step;
    const auto gp = g.generate(plus).pixels;
    const auto gm = g.generate(minus).pixels;
    for (std::size_t p = 0; p < gp.size(); ++p) j(p, k) = (gp[p] - gm[p]) / (2.0 * step);
  }
  return j;
}

/// max |a - b| / (1 + |a|)
inline double max_scaled_deviation(const Matrix& analytic, const Matrix& numeric) {
  double m = 0.0;
  for (std::size_t i = 0; i < analytic.data().size(); ++i) {
    const double a = analytic.data()[i];
    m = std::max(m, std::abs(a - numeric.data()[i]) / (1.0 + std::abs(a)));
  }
  return m;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix gauss_jordan_inverse(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(col, j), a(piv, j));
      std::swap(inv(col, j), inv(piv, j));
    }
    const double p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// det(M - x I) by Gaussian elimination with partial pivoting.
inline double shifted_determinant(const Matrix& m, double x) {
  const std::size_t n = m.rows();
  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i) a(i, i) -= x;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    }
    if (a(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return det;
}

/// Brute-force generalized eigenvalues of (A, B): form B^{-1} A by explicit
/// inversion, then locate the roots of det(B^{-1}A - x I) by sign changes
/// on a logarithmic grid refined by bisection. Assumes a real positive
/// spectrum (A positive definite, B SPD). Returns descending values; fewer
/// than n values means two roots shared a grid cell at every refinement.
inline std::vector<double> brute_force_generalized_eigenvalues(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  const Matrix m = naive_matmul(gauss_jordan_inverse(b), a);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(m(i, j));
    bound = std::max(bound, row);
  }
  bound *= 1.01;
  const auto f = [&](double x) { return shifted_determinant(m, x); };

  std::vector<double> roots;
  for (std::size_t points = 4000; points <= 4000 * 64; points *= 4) {
    roots.clear();
    const double lo = bound * 1e-14;
    const double ratio = std::pow(bound / lo, 1.0 / static_cast<double>(points - 1));
    double x0 = 0.0;
    double f0 = f(x0);
    double x = lo;
    for (std::size_t i = 0; i < points; ++i, x *= ratio) {
      const double x1 = i + 1 == points ? bound : x;
      const double f1 = f(x1);
      if (f1 == 0.0) {
        roots.push_back(x1);
      } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
        double l = x0;
        double r = x1;
        double fl = f0;
        for (int it = 0; it < 200 && r - l > 1e-16 * r; ++it) {
          const double mid = 0.5 * (l + r);
          const double fm = f(mid);
          if ((fm < 0.0) == (fl < 0.0)) {
            l = mid;
            fl = fm;
          } else {
            r = mid;
          }
        }
        roots.push_back(0.5 * (l + r));
      }
      x0 = x1;
      f0 = f1;
    }
    if (roots.size() >= n) break;
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

/// Orthonormal basis (MGS) of the given columns, written independently of
/// the library's orthonormalization.
inline std::vector<std::vector<double>> orthonormal_basis(std::vector<std::vector<double>> cols) {
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double p = 0.0;
        for (std::size_t i = 0; i < cols[j].size(); ++i) p += cols[k][i] * cols[j][i];
        for (std::size_t i = 0; i < cols[j].size(); ++i) cols[j][i] -= p * cols[k][i];
      }
    }
    double nrm = 0.0;
    for (double v : cols[j]) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : cols[j]) v /= nrm;
  }
  return cols;
}

/// Largest principal angle (radians) between span(a) and span(b), equal
/// dimensions: sin(theta_max) = ||(I - P_a) Q_b||_2.
inline double max_principal_angle(const std::vector<std::vector<double>>& a,
                                  const std::vector<std::vector<double>>& b) {
  const auto qa = orthonormal_basis(a);
  const auto qb = orthonormal_basis(b);
  const std::size_t n = qa.front().size();
  const std::size_t c = qb.size();
  // Residual R = Q_b - Q_a Q_a^T Q_b, then the top singular value via power
  // iteration on the small c x c matrix R^T R.
  std::vector<std::vector<double>> resid = qb;
  for (auto& col : resid) {
    for (const auto& q : qa) {
      double p = 0.0;
      for (std::size_t i = 0; i < n; ++i) p += q[i] * col[i];
      for (std::size_t i = 0; i < n; ++i) col[i] -= p * q[i];
    }
  }
  std::vector<std::vector<double>> rtr(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t t = 0; t < n; ++t) rtr[i][j] += resid[i][t] * resid[j][t];
    }
  }
  std::vector<double> v(c, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w(c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) w[i] += rtr[i][j] * v[j];
    }
    double nrm = 0.0;
    for (double x : w) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (std::size_t i = 0; i < c; ++i) v[i] = w[i] / nrm;
    lambda = nrm;
  }
  return std::asin(std::min(1.0, std::sqrt(lambda)));
}

/// Angle between two directions, ignoring sign.
inline double unsigned_angle(std::span<const double> u, std::span<const double> v) {
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    plus += (u[i] + v[i]) * (u[i] + v[i]);
    minus += (u[i] - v[i]) * (u[i] - v[i]);
  }
  return 2.0 * std::asin(std::min(1.0, 0.5 * std::sqrt(std::min(plus, minus))));
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Random (J_f, J_b) pair with J_b of rank `rank` (rows >= rank).
struct BlockPair {
  Matrix foreground;
  Matrix background;
};

inline BlockPair random_blocks(Rng& rng, std::size_t k, std::size_t fg_rows, std::size_t bg_rows,
                               std::size_t bg_rank) {
  BlockPair p;
  p.foreground = random_matrix(rng, fg_rows, k);
  if (bg_rank >= std::min(bg_rows, k)) {
    p.background = random_matrix(rng, bg_rows, k);
  } else {
    p.background = naive_matmul(random_matrix(rng, bg_rows, bg_rank), random_matrix(rng, bg_rank, k));
  }
  return p;
}

/// Cluster-aware comparison of two results over all directions: eigenvalue
/// relative error and the worst principal angle between matching clusters.
struct PathComparison {
  double max_eigenvalue_error = 0.0;
  double max_angle = 0.0;
};

inline PathComparison compare_paths(const FactorizationResult& x, const FactorizationResult& y) {
  PathComparison out;
  const std::size_t n = std::min(x.directions.size(), y.directions.size());
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) {
    values.push_back(x.directions[i].eigenvalue);
    out.max_eigenvalue_error = std::max(
        out.max_eigenvalue_error, relative_error(y.directions[i].eigenvalue, x.directions[i].eigenvalue));
  }
  const auto ids = cluster_ids(values);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end < n && ids[end] == ids[start]) ++end;
    // A cluster cut off by `n` cannot be compared as a subspace.
    if (end < n || n == x.directions.front().vector.size() || end - start == 1) {
      std::vector<std::vector<double>> a;
      std::vector<std::vector<double>> b;
      for (std::size_t i = start; i < end; ++i) {
        a.push_back(x.directions[i].vector);
        b.push_back(y.directions[i].vector);
      }
      out.max_angle = std::max(out.max_angle, max_principal_angle(a, b));
    }
    start = end;
  }
  return out;
}

/// Box around blob m's rest center reaching 3 radii out (clamped to the image).
inline Box blob_box(const ToyGenerator& g, std::size_t m) {
  const Blob& b = std::get<RadialBlobsParams>(g.params()).blobs.at(m);
  const double reach = 3.0 * b.radius;
  const auto lo = [](double v) { return static_cast<std::size_t>(std::max(0.0, std::floor(v))); };
  const auto hi = [](double v, std::size_t limit) {
    return std::min(limit, static_cast<std::size_t>(std::max(0.0, std::ceil(v) + 1.0)));
  };
  return Box{lo(b.rest_y - reach), lo(b.rest_x - reach), hi(b.rest_y + reach, g.shape().height),
             hi(b.rest_x + reach, g.shape().width)};
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace regionfac::testing
