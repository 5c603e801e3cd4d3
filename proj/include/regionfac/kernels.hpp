#pragma once

// Dense product kernels. The top-level functions are OpenMP-parallel; the
// `reference` namespace holds the plain serial loops they are tested
// against. Both accumulate every output entry in the same order (ascending
// inner index, starting from zero), so results are bitwise identical for
// any thread count.

#include "regionfac/matrix.hpp"

namespace regionfac::kernels {

/// M^T M (cols x cols), full symmetric storage.
Matrix gram(const Matrix& m);

/// A B
Matrix matmul(const Matrix& a, const Matrix& b);

/// A^T B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Number of threads OpenMP would use for a parallel region.
int max_threads() noexcept;

namespace reference {

Matrix gram(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

}  // namespace reference

}  // namespace regionfac::kernels
