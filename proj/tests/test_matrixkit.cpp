#include <doctest.h>

#include <cmath>

#include "regionfac/error.hpp"
#include "regionfac/linalg.hpp"
#include "test_support.hpp"

using namespace regionfac;
using testing::max_abs_diff;
using testing::naive_matmul;
using testing::random_matrix;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

double eigen_residual(const SymmetricMatrix& m, const EigenPairs& eig) {
  double worst = 0.0;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    const auto v = eig.vectors.column_copy(i);
    auto mv = multiply(m, v);
    for (std::size_t k = 0; k < v.size(); ++k) mv[k] -= eig.values[i] * v[k];
    worst = std::max(worst, norm2(mv));
  }
  return worst;
}

double orthonormality_error(const Matrix& q) {
  return max_abs_diff(naive_matmul(transpose(q), q), Matrix::identity(q.cols()));
}

Matrix random_orthonormal(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix q = random_matrix(rng, rows, cols);
  orthonormalize_columns(q);
  return q;
}

Matrix low_rank_plus_shift_dense(const Matrix& v, const std::vector<double>& d, double a) {
  Matrix vd = v;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) vd(i, j) *= d[j] * d[j];
  }
  Matrix b = naive_matmul(vd, transpose(v));
  for (std::size_t i = 0; i < b.rows(); ++i) b(i, i) += a;
  return b;
}

}  // namespace

TEST_CASE("eigendecomposition small cases") {
  for (auto solver : {EigenSolver::TridiagonalQl, EigenSolver::Jacobi}) {
    CAPTURE(static_cast<int>(solver));
    auto eig = sym_eigendecompose(SymmetricMatrix::from_rows({{4, 0}, {0, 1}}), solver);
    CHECK(eig.values[0] == doctest::Approx(4.0));
    CHECK(eig.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(eig.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(eig.vectors(1, 1)) == doctest::Approx(1.0));

    eig = sym_eigendecompose(SymmetricMatrix::identity(3), solver);
    for (double v : eig.values) CHECK(v == doctest::Approx(1.0));

    eig = sym_eigendecompose(SymmetricMatrix::from_rows({{2, 1}, {1, 2}}), solver);
    CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(eig.vectors(0, 0)) == doctest::Approx(h));
    CHECK(eig.vectors(0, 0) * eig.vectors(1, 0) > 0.0);
    CHECK(eig.vectors(0, 1) * eig.vectors(1, 1) < 0.0);
  }
}

TEST_CASE("eigendecomposition errors") {
  CHECK(code_of([] { sym_eigendecompose(SymmetricMatrix{}); }) == ErrorCode::EmptyMatrix);
  CHECK(code_of([] { sym_eigendecompose_jacobi(SymmetricMatrix{}); }) == ErrorCode::EmptyMatrix);
  try {
    sym_eigendecompose_jacobi(SymmetricMatrix::from_rows({{2, 1}, {1, 2}}), JacobiSettings{0, 1e-12});
    FAIL("expected ConvergenceFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConvergenceFailure);
    REQUIRE(e.value().has_value());
    CHECK(*e.value() > 0.0);
  }
}

TEST_CASE("eigen residual, orthonormality and order over random matrices") {
  Rng rng(21);
  for (std::size_t n = 1; n <= 64; n += (n < 8 ? 1 : 9)) {
    for (int rep = 0; rep < 3; ++rep) {
      const SymmetricMatrix m(random_matrix(rng, n, n, rep == 2 ? 1e3 : 1.0));
      for (auto solver : {EigenSolver::TridiagonalQl, EigenSolver::Jacobi}) {
        const EigenPairs eig = sym_eigendecompose(m, solver);
        CHECK(eigen_residual(m, eig) <= 1e-9 * (1.0 + m.frobenius_norm()));
        CHECK(orthonormality_error(eig.vectors) <= 1e-10);
        CHECK(std::is_sorted(eig.values.rbegin(), eig.values.rend()));
      }
    }
  }
}

TEST_CASE("tridiagonal QL and Jacobi agree on eigenvalues") {
  Rng rng(22);
  for (std::size_t n : {2u, 5u, 17u, 40u}) {
    const SymmetricMatrix m(random_matrix(rng, n, n));
    const auto ql = sym_eigendecompose(m);
    const auto jac = sym_eigendecompose_jacobi(m);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ql.values[i] - jac.values[i]) <= 1e-11 * m.frobenius_norm());
  }
}

TEST_CASE("eigendecomposition handles repeated and zero eigenvalues") {
  Rng rng(23);
  const Matrix q = random_orthonormal(rng, 12, 12);
  std::vector<double> lam = {5, 5, 5, 2, 2, 0, 0, 0, 0, -1, -1, -1};
  const Matrix m = naive_matmul(naive_matmul(q, Matrix::diagonal(lam)), transpose(q));
  const SymmetricMatrix s(m);
  for (auto solver : {EigenSolver::TridiagonalQl, EigenSolver::Jacobi}) {
    const auto eig = sym_eigendecompose(s, solver);
    for (std::size_t i = 0; i < lam.size(); ++i) CHECK(std::abs(eig.values[i] - lam[i]) < 1e-12);
    CHECK(eigen_residual(s, eig) <= 1e-9 * (1.0 + s.frobenius_norm()));
    CHECK(orthonormality_error(eig.vectors) <= 1e-10);
  }
}

TEST_CASE("cholesky examples") {
  CHECK(cholesky(SymmetricMatrix::identity(2)) == Matrix::identity(2));
  const Matrix l = cholesky(SymmetricMatrix::from_rows({{4, 2}, {2, 5}}));
  CHECK(l == Matrix::from_rows({{2, 0}, {1, 2}}));
  try {
    cholesky(SymmetricMatrix::from_rows({{1, 2}, {2, 1}}));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    CHECK(e.index() == std::optional<std::size_t>(1));
  }
}

TEST_CASE("cholesky reconstructs 1000 random SPD matrices") {
  Rng rng(24);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  for (int rep = 0; rep < 1000; ++rep) {
    const SymmetricMatrix m = testing::random_spd(rng, dim(rng), 1e-3);
    const Matrix l = cholesky(m);
    for (std::size_t i = 0; i < l.rows(); ++i) {
      REQUIRE(l(i, i) > 0.0);
      for (std::size_t j = i + 1; j < l.cols(); ++j) REQUIRE(l(i, j) == 0.0);
    }
    REQUIRE(max_abs_diff(naive_matmul(l, transpose(l)), m.matrix()) <= 1e-10 * m.frobenius_norm());
  }
}

TEST_CASE("triangular solves") {
  Rng rng(25);
  const Matrix b = random_matrix(rng, 3, 2);
  CHECK(solve_lower_triangular(Matrix::identity(3), b) == b);
  CHECK(solve_lower_transposed(Matrix::identity(3), b) == b);

  const Matrix l = Matrix::from_rows({{2, 0}, {1, 2}});
  CHECK(solve_lower_triangular(l, Matrix::from_rows({{2}, {3}})) == Matrix::from_rows({{1}, {1}}));
  // L^T x = (3, 2): x2 = 1, 2 x1 + 1 = 3.
  CHECK(solve_lower_transposed(l, Matrix::from_rows({{3}, {2}})) == Matrix::from_rows({{1}, {1}}));

  try {
    solve_lower_triangular(Matrix::from_rows({{1, 0}, {0, 0}}), Matrix::from_rows({{1}, {1}}));
    FAIL("expected SingularTriangular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularTriangular);
    CHECK(e.index() == std::optional<std::size_t>(1));
  }
  CHECK(code_of([] { solve_lower_transposed(Matrix::from_rows({{0, 0}, {1, 1}}), Matrix(2, 1)); }) ==
        ErrorCode::SingularTriangular);
  CHECK(code_of([] { solve_lower_triangular(Matrix::identity(2), Matrix(3, 1)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("triangular solves invert random factors") {
  Rng rng(26);
  for (std::size_t n : {1u, 4u, 33u}) {
    const Matrix l = cholesky(testing::random_spd(rng, n));
    const Matrix b = random_matrix(rng, n, 3);
    CHECK(max_abs_diff(naive_matmul(l, solve_lower_triangular(l, b)), b) < 1e-10);
    CHECK(max_abs_diff(naive_matmul(transpose(l), solve_lower_transposed(l, b)), b) < 1e-10);
  }
}

TEST_CASE("thin SVD examples") {
  auto svd = thin_svd(Matrix::identity(2));
  CHECK(svd.rank == 2);
  CHECK(svd.singular_values[0] == doctest::Approx(1.0));
  CHECK(svd.singular_values[1] == doctest::Approx(1.0));

  svd = thin_svd(Matrix::from_rows({{3, 0}, {0, 0}}), 1e-12);
  CHECK(svd.rank == 1);
  REQUIRE(svd.singular_values.size() == 1);
  CHECK(svd.singular_values[0] == doctest::Approx(3.0));

  svd = thin_svd(Matrix(5, 3));
  CHECK(svd.rank == 0);
  CHECK(svd.singular_values.empty());

  CHECK(code_of([] { thin_svd(Matrix::identity(2), -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("thin SVD reconstruction and orthonormality") {
  Rng rng(27);
  const std::size_t shapes[][2] = {{6, 4}, {4, 6}, {1, 5}, {5, 1}, {200, 30}, {30, 200}, {64, 64}};
  for (const auto& s : shapes) {
    const Matrix m = random_matrix(rng, s[0], s[1]);
    const SvdFactors svd = thin_svd(m, 0.0);
    CHECK(svd.rank == std::min(s[0], s[1]));
    Matrix us = svd.left;
    for (std::size_t i = 0; i < us.rows(); ++i) {
      for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= svd.singular_values[j];
    }
    CHECK(max_abs_diff(naive_matmul(us, transpose(svd.right)), m) <= 1e-8 * m.frobenius_norm());
    CHECK(orthonormality_error(svd.left) < 1e-10);
    CHECK(orthonormality_error(svd.right) < 1e-10);
    CHECK(std::is_sorted(svd.singular_values.rbegin(), svd.singular_values.rend()));
  }
}

TEST_CASE("thin SVD recovers the rank of low-rank products") {
  Rng rng(28);
  for (std::size_t r : {1u, 3u, 8u}) {
    const Matrix m = naive_matmul(random_matrix(rng, 100, r), random_matrix(rng, r, 64));
    const SvdFactors svd = thin_svd(m);
    CHECK(svd.rank == r);
    CHECK(svd.right.cols() == r);
    const SvdFactors no_left = thin_svd(m, kDefaultRankTolerance, SvdOptions{.want_left = false});
    CHECK(no_left.left.empty());
    CHECK(no_left.rank == r);
  }
}

TEST_CASE("Woodbury inverse examples") {
  WoodburyFactors f = woodbury_inverse_factors(Matrix(3, 0), {}, 2.0);
  CHECK(max_abs_diff(apply_woodbury_inverse(f, Matrix::identity(3)), 0.5 * Matrix::identity(3)) == 0.0);

  const Matrix e1 = Matrix::from_rows({{1}, {0}});
  const std::vector<double> d = {1.0};
  f = woodbury_inverse_factors(e1, d, 1.0);
  REQUIRE(f.dtilde.size() == 1);
  CHECK(f.dtilde[0] == 0.5);
  CHECK(f.scale == 1.0);
  const Matrix inv = apply_woodbury_inverse(f, Matrix::identity(2));
  CHECK(max_abs_diff(inv, Matrix::from_rows({{0.5, 0}, {0, 1}})) < 1e-15);
  CHECK(max_abs_diff(naive_matmul(inv, Matrix::from_rows({{2, 0}, {0, 1}})), Matrix::identity(2)) < 1e-15);

  CHECK(code_of([&] { woodbury_inverse_factors(e1, d, 0.0); }) == ErrorCode::InvalidRegularizer);
  CHECK(code_of([&] { woodbury_inverse_factors(e1, d, -1.0); }) == ErrorCode::InvalidRegularizer);
}

TEST_CASE("Woodbury inverse times B_reg is the identity") {
  Rng rng(29);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = dim(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, k)(rng);
    const Matrix v = random_orthonormal(rng, k, r);
    std::vector<double> d(r);
    for (double& x : d) x = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    const double a = std::exp(std::uniform_real_distribution<double>(-4, 1)(rng));
    const Matrix b = low_rank_plus_shift_dense(v, d, a);
    const Matrix prod = apply_woodbury_inverse(woodbury_inverse_factors(v, d, a), b);
    REQUIRE(max_abs_diff(prod, Matrix::identity(k)) <= 1e-9);
    REQUIRE(max_abs_diff(apply_low_rank_plus_shift(v, d, a, Matrix::identity(k)), b) <= 1e-12 * (1 + b.frobenius_norm()));
  }
}

TEST_CASE("inverse square root examples") {
  CHECK(max_abs_diff(apply_inverse_sqrt(Matrix(2, 0), {}, 4.0, Matrix::identity(2)), 0.5 * Matrix::identity(2)) ==
        0.0);
  const std::vector<double> d = {std::sqrt(3.0)};
  const Matrix s = apply_inverse_sqrt(Matrix::from_rows({{1}, {0}}), d, 1.0, Matrix::identity(2));
  CHECK(max_abs_diff(s, Matrix::from_rows({{0.5, 0}, {0, 1}})) < 1e-15);
  CHECK(code_of([&] { apply_inverse_sqrt(Matrix::from_rows({{1}, {0}}), d, 0.0, Matrix::identity(2)); }) ==
        ErrorCode::InvalidRegularizer);
}

TEST_CASE("inverse square root squares to the inverse") {
  Rng rng(30);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = dim(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, k)(rng);
    const Matrix v = random_orthonormal(rng, k, r);
    std::vector<double> d(r);
    for (double& x : d) x = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    const double a = std::exp(std::uniform_real_distribution<double>(-4, 1)(rng));
    const Matrix half = apply_inverse_sqrt(v, d, a, Matrix::identity(k));
    const Matrix twice = apply_inverse_sqrt(v, d, a, half);
    const Matrix inv = apply_woodbury_inverse(woodbury_inverse_factors(v, d, a), Matrix::identity(k));
    REQUIRE(max_abs_diff(twice, inv) <= 1e-8 * (1.0 + inv.frobenius_norm()));
    // Squaring oracle against B_reg itself.
    const Matrix b = low_rank_plus_shift_dense(v, d, a);
    REQUIRE(max_abs_diff(naive_matmul(naive_matmul(half, half), b), Matrix::identity(k)) <= 1e-9);
  }
}

TEST_CASE("inverse square root congruence matches two one-sided products") {
  Rng rng(32);
  std::uniform_int_distribution<std::size_t> dim(1, 48);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = dim(rng);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, k)(rng);
    const Matrix v = random_orthonormal(rng, k, r);
    std::vector<double> d(r);
    for (double& x : d) x = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    const double a = std::exp(std::uniform_real_distribution<double>(-4, 1)(rng));
    const SymmetricMatrix x(testing::naive_gram(random_matrix(rng, k + 3, k)));
    const Matrix half = apply_inverse_sqrt(v, d, a, Matrix::identity(k));
    const Matrix expected = naive_matmul(naive_matmul(half, x.matrix()), half);
    const SymmetricMatrix got = inverse_sqrt_congruence(v, d, a, x);
    REQUIRE(max_abs_diff(got.matrix(), expected) <= 1e-10 * (1.0 + expected.frobenius_norm()));
  }
  CHECK(inverse_sqrt_congruence(Matrix(2, 0), {}, 4.0, SymmetricMatrix::identity(2)) ==
        SymmetricMatrix::identity(2).scaled(0.25));
  const std::vector<double> d = {1.0};
  CHECK(code_of([&] { inverse_sqrt_congruence(Matrix::from_rows({{1}, {0}, {0}}), d, 1.0, SymmetricMatrix::identity(2)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("pivoted cholesky reproduces a semidefinite matrix") {
  Rng rng(31);
  const Matrix g = random_matrix(rng, 5, 20);
  const SymmetricMatrix m(testing::naive_gram(g));
  const PivotedCholesky pc = pivoted_cholesky(m, 1e-12);
  CHECK(pc.rank == 5);
  CHECK(max_abs_diff(testing::naive_gram(pc.factor), m.matrix()) < 1e-10 * m.frobenius_norm());
}

TEST_CASE("orthonormalize_columns") {
  Rng rng(32);
  Matrix q = random_matrix(rng, 30, 10);
  orthonormalize_columns(q);
  CHECK(orthonormality_error(q) < 1e-13);
  Matrix z(4, 2);
  z(0, 0) = 1.0;
  orthonormalize_columns(z);
  CHECK(z.column_copy(1) == std::vector<double>(4, 0.0));
}

TEST_CASE("matrix construction validates input") {
  CHECK(code_of([] { Matrix(2, 2, {1, 2, 3}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { Matrix(1, 2, {1, std::nan("")}); }) == ErrorCode::NonFiniteValue);
  const SymmetricMatrix s(Matrix::from_rows({{1, 2}, {7, 3}}));
  CHECK(s(1, 0) == 2.0);
  CHECK(s.trace() == 4.0);
  CHECK(s.shifted(1.0)(0, 0) == 2.0);
}
