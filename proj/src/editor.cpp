#include "regionfac/editor.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include "regionfac/error.hpp"

namespace regionfac {

ImageBuffer edit(const EditRequest& request) {
  const std::size_t k = request.generator.latent_dim();
  if (request.z.size() != k || request.direction.size() != k) {
    throw Error(ErrorCode::DimensionMismatch, "edit needs z and direction of length K = " + std::to_string(k));
  }
  if (!std::isfinite(request.alpha)) throw Error(ErrorCode::NonFiniteValue, "alpha must be finite");
  LatentCode moved = request.z;
  for (std::size_t i = 0; i < k; ++i) moved[i] += request.alpha * request.direction[i];
  return request.generator.generate(moved);
}

MaskedMse masked_mse(const ImageBuffer& original, const ImageBuffer& edited, const RegionMask& mask) {
  if (!(original.shape == edited.shape) || original.pixels.size() != edited.pixels.size() ||
      original.pixels.size() != mask.pixel_count()) {
    throw Error(ErrorCode::DimensionMismatch, "image shapes and mask length must agree");
  }
  double inside = 0.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < original.pixels.size(); ++i) {
    const double diff = edited.pixels[i] - original.pixels[i];
    (mask.is_foreground(i) ? inside : outside) += diff * diff;
  }
  return MaskedMse{inside / static_cast<double>(mask.foreground_count()),
                   outside / static_cast<double>(mask.background_count())};
}

SweepReport sweep(const ToyGenerator& generator, const LatentCode& z,
                  std::span<const SemanticDirection> directions, const RegionMask& mask,
                  std::span<const double> alpha_grid) {
  for (double alpha : alpha_grid) {
    if (!std::isfinite(alpha)) throw Error(ErrorCode::NonFiniteValue, "alpha grid must be finite");
  }
  if (mask.pixel_count() != generator.pixel_count()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length differs from generator pixel count");
  }
  const ImageBuffer original = generator.generate(z);
  SweepReport report;
  report.alphas.assign(alpha_grid.begin(), alpha_grid.end());
  const std::size_t per_direction = alpha_grid.size();
  report.records.resize(directions.size() * per_direction);
  const auto total = static_cast<std::ptrdiff_t>(report.records.size());
  for (const auto& d : directions) {
    if (d.vector.size() != generator.latent_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "direction length differs from generator K");
    }
  }

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    const std::size_t dir = i / per_direction;
    const double alpha = alpha_grid[i % per_direction];
    SweepRecord& rec = report.records[i];
    rec.direction_id = dir;
    rec.alpha = alpha;
    try {
      const ImageBuffer edited = edit(EditRequest{generator, z, directions[dir].vector, alpha});
      rec.mse = masked_mse(original, edited, mask);
    } catch (...) {
#pragma omp critical(regionfac_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

std::vector<double> default_alpha_grid(double top_eigenvalue) {
  if (!(top_eigenvalue > 0.0) || !std::isfinite(top_eigenvalue)) {
    throw Error(ErrorCode::InvalidArgument, "default alpha grid needs a positive top eigenvalue");
  }
  const double scale = 1.0 / std::sqrt(top_eigenvalue);
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i - 10) / 10.0 * scale);
  return grid;
}

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  out << "direction_id,alpha,mse_in,mse_out\n";
  char buf[128];
  for (const auto& rec : report.records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", rec.direction_id, rec.alpha, rec.mse.inside,
                  rec.mse.outside);
    out << buf;
  }
}

}  // namespace regionfac
