#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regionfac/matrix.hpp"

namespace regionfac {

/// Eigenvalues in non-increasing order; column i of `vectors` pairs with values[i].
struct EigenPairs {
  std::vector<double> values;
  Matrix vectors;
};

/// Thin SVD M = U diag(D) V^T with D strictly positive and non-increasing.
/// `left` is empty when left factors were not requested.
struct SvdFactors {
  Matrix left;
  std::vector<double> singular_values;
  Matrix right;
  std::size_t rank = 0;
};

enum class EigenSolver {
  /// Householder tridiagonalization followed by implicit QL.
  TridiagonalQl,
  /// Cyclic Jacobi rotations; slower, kept as an independent cross-check.
  Jacobi,
};

struct JacobiSettings {
  int max_sweeps = 100;
  /// Converged when ||offdiag||_F <= tolerance * ||M||_F.
  double tolerance = 1e-12;
};

EigenPairs sym_eigendecompose(const SymmetricMatrix& m, EigenSolver solver = EigenSolver::TridiagonalQl);
EigenPairs sym_eigendecompose_jacobi(const SymmetricMatrix& m, JacobiSettings settings = {});

/// Lower-triangular L with positive diagonal and L L^T = M. Throws
/// NotPositiveDefinite with the failing pivot index.
Matrix cholesky(const SymmetricMatrix& m);

/// Solves L X = B by forward substitution.
Matrix solve_lower_triangular(const Matrix& lower, const Matrix& rhs);
/// Solves L^T X = B by back substitution, reading only the lower triangle of L.
Matrix solve_lower_transposed(const Matrix& lower, const Matrix& rhs);

/// Rank-revealing Cholesky with diagonal pivoting: M ~= R^T R where R is
/// rank x n and column j of R corresponds to column j of M (the pivot
/// order is already undone). Stops once the largest remaining diagonal is
/// at most tolerance * max(diag(M)).
struct PivotedCholesky {
  Matrix factor;
  std::size_t rank = 0;
};
PivotedCholesky pivoted_cholesky(const SymmetricMatrix& m, double tolerance);

inline constexpr double kDefaultRankTolerance = 1e-10;

struct SvdOptions {
  bool want_left = true;
};

/// Thin SVD via Gram-matrix eigendecomposition on the thinner side.
/// Singular values below rank_tolerance * max(D) are dropped; an all-zero
/// matrix yields rank 0.
SvdFactors thin_svd(const Matrix& m, double rank_tolerance = kDefaultRankTolerance,
                    SvdOptions options = {});

/// Factored inverse of B_reg = V diag(D)^2 V^T + a I:
///   B_reg^{-1} = scale * (I - V diag(dtilde) V^T),  scale = 1/a,
///   dtilde_i = d_i^2 / (a + d_i^2).
struct WoodburyFactors {
  double scale = 0.0;
  Matrix basis;
  std::vector<double> dtilde;
};

WoodburyFactors woodbury_inverse_factors(const Matrix& basis, std::span<const double> singular_values,
                                         double a);
/// B_reg^{-1} X using the factored form.
Matrix apply_woodbury_inverse(const WoodburyFactors& factors, const Matrix& x);

/// B_reg^{-1/2} X = a^{-1/2} (X - V diag(s) V^T X),  s_i = 1 - sqrt(a / (a + d_i^2)).
Matrix apply_inverse_sqrt(const Matrix& basis, std::span<const double> singular_values, double a,
                          const Matrix& x);

/// B_reg^{-1/2} X B_reg^{-1/2} for symmetric X, as X minus a symmetric
/// rank-2r correction, scaled by 1/a.
SymmetricMatrix inverse_sqrt_congruence(const Matrix& basis, std::span<const double> singular_values, double a,
                                        const SymmetricMatrix& x);

/// B_reg X = V diag(D^2) V^T X + a X.
Matrix apply_low_rank_plus_shift(const Matrix& basis, std::span<const double> singular_values,
                                 double a, const Matrix& x);

/// Two passes of modified Gram-Schmidt over the columns, in order.
/// Columns that collapse to zero are left as zero.
void orthonormalize_columns(Matrix& m);

}  // namespace regionfac
