#include "regionfac/factorizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regionfac/error.hpp"
#include "regionfac/kernels.hpp"

namespace regionfac {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidRegularizer, "tau must be positive and finite", std::nullopt, tau);
  }
}

void require_top(std::size_t top, std::size_t k) {
  if (top == 0 || top > k) {
    throw Error(ErrorCode::InvalidArgument,
                "top must be in [1, K]; got " + std::to_string(top) + " with K = " + std::to_string(k));
  }
}

SymmetricMatrix symmetrized(const Matrix& m) {
  Matrix s = m;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = i + 1; j < s.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  }
  return SymmetricMatrix(std::move(s));
}

Matrix leading_columns(const Matrix& m, std::size_t count) {
  Matrix out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = m.row(i).first(count);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// Turns the raw back-mapped vectors (columns of `raw`, with the matching
// columns of `b_raw` = B_reg raw) into unit, sign-canonical directions.
std::vector<SemanticDirection> make_directions(const Matrix& raw, const Matrix& b_raw,
                                               std::span<const double> eigenvalues) {
  std::vector<SemanticDirection> out;
  out.reserve(raw.cols());
  for (std::size_t j = 0; j < raw.cols(); ++j) {
    SemanticDirection d;
    d.vector = raw.column_copy(j);
    d.b_norm = dot(d.vector, b_raw.column_copy(j));
    const double nrm = norm2(d.vector);
    if (!(nrm > 0.0)) throw Error(ErrorCode::NumericalInconsistency, "eigenvector collapsed to zero");
    for (double& v : d.vector) v /= nrm;
    canonicalize_sign(d.vector);
    d.eigenvalue = std::max(eigenvalues[j], 0.0);
    d.rank_index = j;
    out.push_back(std::move(d));
  }
  return out;
}

template <class ApplyB>
StationarityReport stationarity(const std::vector<SemanticDirection>& directions, const SymmetricMatrix& a,
                                double b_norm_f, ApplyB&& apply_b) {
  StationarityReport report;
  std::vector<double> values;
  values.reserve(directions.size());
  for (const auto& d : directions) values.push_back(d.eigenvalue);
  const auto clusters = cluster_ids(values);
  const double a_norm = a.frobenius_norm();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto& d = directions[i];
    const auto an = multiply(a, d.vector);
    const auto bn = apply_b(d.vector);
    std::vector<double> diff(an.size());
    for (std::size_t k = 0; k < an.size(); ++k) diff[k] = an[k] - d.eigenvalue * bn[k];
    const double scale = a_norm + d.eigenvalue * b_norm_f;
    DirectionDiagnostics diag;
    diag.residual = scale > 0.0 ? norm2(diff) / scale : norm2(diff);
    diag.constraint_residual = std::abs(d.b_norm - 1.0);
    diag.cluster_id = clusters[i];
    report.directions.push_back(diag);
  }
  return report;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  return method == Method::Standard ? "standard" : "fast";
}

Method parse_method(std::string_view name) {
  if (name == "standard") return Method::Standard;
  if (name == "fast") return Method::Fast;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

double gram_trace(const Matrix& block) noexcept {
  double trace = 0.0;
  for (std::size_t i = 0; i < block.cols(); ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < block.rows(); ++r) s += block(r, i) * block(r, i);
    trace += s;
  }
  return trace;
}

RegularizedGram regularize(const SymmetricMatrix& background_gram, double tau) {
  require_tau(tau);
  const auto data = background_gram.matrix().data();
  if (std::all_of(data.begin(), data.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::ZeroBackgroundJacobian,
                "background Gram matrix is zero; background pixels carry no sensitivity");
  }
  for (std::size_t i = 0; i < background_gram.dim(); ++i) {
    if (background_gram(i, i) < 0.0) {
      throw Error(ErrorCode::NumericalInconsistency, "negative diagonal in a Gram matrix", i,
                  background_gram(i, i));
    }
  }
  const double trace = background_gram.trace();
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::NumericalInconsistency, "non-zero PSD matrix with zero trace");
  }
  const double a = tau * trace;
  return RegularizedGram{background_gram.shifted(a), Regularizer{tau, a}};
}

FactorizationResult factorize_standard(const SymmetricMatrix& a, const SymmetricMatrix& b_reg, std::size_t top) {
  if (a.dim() != b_reg.dim()) throw Error(ErrorCode::DimensionMismatch, "A and B_reg dimensions differ");
  require_top(top, a.dim());
  const Matrix lower = cholesky(b_reg);
  const Matrix half = solve_lower_triangular(lower, a.matrix());            // L^{-1} A
  const Matrix reduced = solve_lower_triangular(lower, transpose(half));    // L^{-1} A L^{-T}
  const EigenPairs eig = sym_eigendecompose(symmetrized(reduced));

  const Matrix raw = solve_lower_transposed(lower, leading_columns(eig.vectors, top));  // L^{-T} n~
  const Matrix b_raw = kernels::matmul(b_reg.matrix(), raw);

  FactorizationResult result;
  result.method = Method::Standard;
  result.retained_rank = a.dim();
  result.directions = make_directions(raw, b_raw, eig.values);
  result.diagnostics = verify_stationarity(result, a, b_reg);
  return result;
}

FactorizationResult factorize_standard(const Matrix& foreground, const Matrix& background, double tau,
                                       std::size_t top) {
  if (foreground.cols() != background.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "foreground and background blocks have different K");
  }
  const SymmetricMatrix a = gram(foreground);
  const RegularizedGram b = regularize(gram(background), tau);
  FactorizationResult result = factorize_standard(a, b.matrix, top);
  result.regularizer = b.regularizer;
  return result;
}

FactorizationResult factorize_fast(const Matrix& foreground, const Matrix& background, double tau,
                                   double rank_tolerance, std::size_t top) {
  if (foreground.cols() != background.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "foreground and background blocks have different K");
  }
  require_tau(tau);
  const std::size_t k = foreground.cols();
  require_top(top, k);

  const SvdFactors svd = thin_svd(background, rank_tolerance, SvdOptions{.want_left = false});
  if (svd.rank == 0) {
    throw Error(ErrorCode::ZeroBackgroundJacobian,
                "background Jacobian is zero; background pixels carry no sensitivity");
  }
  const Regularizer reg{tau, tau * gram_trace(background)};
  const Matrix& v = svd.right;
  const auto& d = svd.singular_values;

  const SymmetricMatrix a = gram(foreground);
  const EigenPairs eig = sym_eigendecompose(inverse_sqrt_congruence(v, d, reg.a, a));

  const Matrix raw = apply_inverse_sqrt(v, d, reg.a, leading_columns(eig.vectors, top));
  const Matrix b_raw = apply_low_rank_plus_shift(v, d, reg.a, raw);

  FactorizationResult result;
  result.method = Method::Fast;
  result.regularizer = reg;
  result.retained_rank = svd.rank;
  result.directions = make_directions(raw, b_raw, eig.values);

  // ||B_reg||_F from the factored form: eigenvalues d_i^2 + a (r of them) and a.
  double b_sq = static_cast<double>(k - svd.rank) * reg.a * reg.a;
  for (double s : d) b_sq += (s * s + reg.a) * (s * s + reg.a);
  result.diagnostics = stationarity(result.directions, a, std::sqrt(b_sq), [&](const std::vector<double>& n) {
    return apply_low_rank_plus_shift(v, d, reg.a, Matrix::column(n)).column_copy(0);
  });
  return result;
}

FactorizationResult factorize(const SplitJacobian& parts, const FactorizeOptions& options) {
  if (options.method == Method::Standard) {
    return factorize_standard(parts.foreground, parts.background, options.tau, options.top);
  }
  return factorize_fast(parts.foreground, parts.background, options.tau, options.rank_tolerance, options.top);
}

double rayleigh_quotient(std::span<const double> n, const SymmetricMatrix& a, const SymmetricMatrix& b_reg) {
  if (n.size() != a.dim() || n.size() != b_reg.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "vector length differs from matrix dimension");
  }
  if (std::all_of(n.begin(), n.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::ZeroVector, "Rayleigh quotient of the zero vector");
  }
  return quadratic_form(a, n) / quadratic_form(b_reg, n);
}

StationarityReport verify_stationarity(const FactorizationResult& result, const SymmetricMatrix& a,
                                       const SymmetricMatrix& b_reg) {
  for (const auto& d : result.directions) {
    if (d.vector.size() != a.dim() || a.dim() != b_reg.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "direction length differs from matrix dimension");
    }
  }
  return stationarity(result.directions, a, b_reg.frobenius_norm(),
                      [&](const std::vector<double>& n) { return multiply(b_reg, n); });
}

double StationarityReport::max_residual() const noexcept {
  double m = 0.0;
  for (const auto& d : directions) m = std::max(m, d.residual);
  return m;
}

double StationarityReport::max_constraint_residual() const noexcept {
  double m = 0.0;
  for (const auto& d : directions) m = std::max(m, d.constraint_residual);
  return m;
}

std::vector<std::size_t> StationarityReport::failing(double tolerance) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto& d = directions[i];
    // Negated comparisons so NaN counts as a failure.
    if (!(d.residual <= tolerance) || !(d.constraint_residual <= tolerance)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> cluster_ids(std::span<const double> eigenvalues, double relative_gap) {
  std::vector<std::size_t> ids(eigenvalues.size(), 0);
  std::size_t id = 0;
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    const double prev = eigenvalues[i - 1];
    const double cur = eigenvalues[i];
    const double scale = std::max(std::abs(prev), std::abs(cur));
    if (std::abs(prev - cur) > relative_gap * scale) ++id;
    ids[i] = id;
  }
  return ids;
}

void canonicalize_sign(std::span<double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

}  // namespace regionfac
