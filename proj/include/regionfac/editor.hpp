#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "regionfac/factorizer.hpp"
#include "regionfac/generators.hpp"
#include "regionfac/regions.hpp"

namespace regionfac {

struct EditRequest {
  const ToyGenerator& generator;
  LatentCode z;
  std::span<const double> direction;
  double alpha = 0.0;
};

/// G(z + alpha n).
ImageBuffer edit(const EditRequest& request);

struct MaskedMse {
  double inside = 0.0;
  double outside = 0.0;
};

/// Per-element mean squared change over the foreground and background.
MaskedMse masked_mse(const ImageBuffer& original, const ImageBuffer& edited, const RegionMask& mask);

struct SweepRecord {
  std::size_t direction_id = 0;
  double alpha = 0.0;
  MaskedMse mse;
};

struct SweepReport {
  std::vector<double> alphas;
  std::vector<SweepRecord> records;  // direction-major, alpha-minor
};

SweepReport sweep(const ToyGenerator& generator, const LatentCode& z,
                  std::span<const SemanticDirection> directions, const RegionMask& mask,
                  std::span<const double> alpha_grid);

/// 21 evenly spaced points in [-1, 1] (0 exactly in the middle) divided by sqrt(top_eigenvalue).
std::vector<double> default_alpha_grid(double top_eigenvalue);

/// CSV with header `direction_id,alpha,mse_in,mse_out`, numbers at 17 significant digits.
void write_sweep_csv(const SweepReport& report, std::ostream& out);

}  // namespace regionfac
