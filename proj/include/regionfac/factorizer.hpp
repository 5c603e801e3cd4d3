#pragma once

// Region-based direction discovery: maximize the generalized Rayleigh
// quotient n^T A n / n^T B_reg n with A = J_f^T J_f and
// B_reg = J_b^T J_b + a I, a = tau * tr(J_b^T J_b).
//
// Both solution paths reduce the generalized problem to a symmetric one by
// congruence: the standard path uses L^{-1} A L^{-T} with B_reg = L L^T, the
// fast path uses B_reg^{-1/2} A B_reg^{-1/2} with B_reg^{-1/2} built from the
// thin SVD of J_b in Woodbury form.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "regionfac/linalg.hpp"
#include "regionfac/matrix.hpp"
#include "regionfac/regions.hpp"

namespace regionfac {

inline constexpr double kDefaultTau = 1e-3;
inline constexpr std::size_t kDefaultTop = 7;
/// Relative eigenvalue gap below which neighbouring directions share a cluster.
inline constexpr double kClusterGap = 1e-6;
inline constexpr double kStationarityTolerance = 1e-8;

struct Regularizer {
  double tau = 0.0;
  double a = 0.0;
};

struct RegularizedGram {
  SymmetricMatrix matrix;
  Regularizer regularizer;
};

/// B + tau * tr(B) * I.
RegularizedGram regularize(const SymmetricMatrix& background_gram, double tau);

enum class Method { Standard, Fast };
std::string_view to_string(Method method) noexcept;
/// "standard" or "fast"; throws InvalidArgument.
Method parse_method(std::string_view name);

struct SemanticDirection {
  std::vector<double> vector;  // unit length, largest-magnitude entry positive
  double eigenvalue = 0.0;
  std::size_t rank_index = 0;
  /// n^T B_reg n of the vector before it was scaled to unit length.
  double b_norm = 0.0;
};

struct DirectionDiagnostics {
  /// ||A n - lambda B_reg n|| / (||A||_F + lambda ||B_reg||_F)
  double residual = 0.0;
  /// |b_norm - 1|
  double constraint_residual = 0.0;
  std::size_t cluster_id = 0;
};

struct StationarityReport {
  std::vector<DirectionDiagnostics> directions;

  double max_residual() const noexcept;
  double max_constraint_residual() const noexcept;
  /// Indices whose residual or constraint residual exceeds the tolerance.
  std::vector<std::size_t> failing(double tolerance = kStationarityTolerance) const;
  bool passed(double tolerance = kStationarityTolerance) const { return failing(tolerance).empty(); }
};

struct FactorizationResult {
  std::vector<SemanticDirection> directions;  // descending eigenvalue
  Method method = Method::Standard;
  Regularizer regularizer;
  /// Retained rank of J_b (fast path); K for the standard path.
  std::size_t retained_rank = 0;
  StationarityReport diagnostics;
};

/// Standard path on precomputed A and B_reg. The returned regularizer is
/// zero because B_reg is opaque here; the block overload fills it in.
FactorizationResult factorize_standard(const SymmetricMatrix& a, const SymmetricMatrix& b_reg,
                                       std::size_t top = kDefaultTop);
FactorizationResult factorize_standard(const Matrix& foreground, const Matrix& background,
                                       double tau = kDefaultTau, std::size_t top = kDefaultTop);

FactorizationResult factorize_fast(const Matrix& foreground, const Matrix& background,
                                   double tau = kDefaultTau,
                                   double rank_tolerance = kDefaultRankTolerance,
                                   std::size_t top = kDefaultTop);

struct FactorizeOptions {
  Method method = Method::Fast;
  double tau = kDefaultTau;
  double rank_tolerance = kDefaultRankTolerance;
  std::size_t top = kDefaultTop;
};

FactorizationResult factorize(const SplitJacobian& parts, const FactorizeOptions& options = {});

/// (n^T A n) / (n^T B_reg n). Throws ZeroVector for n == 0.
double rayleigh_quotient(std::span<const double> n, const SymmetricMatrix& a, const SymmetricMatrix& b_reg);

StationarityReport verify_stationarity(const FactorizationResult& result, const SymmetricMatrix& a,
                                       const SymmetricMatrix& b_reg);

/// Cluster ids for a non-increasing eigenvalue list: neighbours whose
/// relative gap is below `relative_gap` share an id. Ids start at 0.
std::vector<std::size_t> cluster_ids(std::span<const double> eigenvalues, double relative_gap = kClusterGap);

/// Flips v so that its largest-magnitude coordinate (first on ties) is positive.
void canonicalize_sign(std::span<double> v) noexcept;

/// tr(M^T M) summed in the same order as the Gram kernel's diagonal.
double gram_trace(const Matrix& block) noexcept;

}  // namespace regionfac
