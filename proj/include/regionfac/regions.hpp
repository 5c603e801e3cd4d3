#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "regionfac/generators.hpp"
#include "regionfac/matrix.hpp"

namespace regionfac {

/// Foreground/background partition of the P flattened pixel elements.
/// Both sides are guaranteed non-empty.
class RegionMask {
 public:
  /// Throws DegenerateMask when either side would be empty.
  explicit RegionMask(std::vector<std::uint8_t> foreground);

  std::size_t pixel_count() const noexcept { return flags_.size(); }
  bool is_foreground(std::size_t i) const noexcept { return flags_[i] != 0; }
  std::size_t foreground_count() const noexcept { return foreground_; }
  std::size_t background_count() const noexcept { return flags_.size() - foreground_; }
  const std::vector<std::uint8_t>& flags() const noexcept { return flags_; }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t foreground_ = 0;
};

/// Half-open box [top, bottom) x [left, right) in pixel coordinates.
struct Box {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t bottom = 0;
  std::size_t right = 0;
};

/// Marks every channel inside the box as foreground.
RegionMask mask_from_box(const ImageShape& shape, const Box& box);

enum class JacobianProvenance { ToyGenerator, Imported };

struct JacobianMatrix {
  Matrix entries;  // P x K
  JacobianProvenance provenance = JacobianProvenance::Imported;

  std::size_t pixel_count() const noexcept { return entries.rows(); }
  std::size_t latent_dim() const noexcept { return entries.cols(); }
};

struct SplitJacobian {
  Matrix foreground;
  Matrix background;
  RegionMask mask;
};

/// Row partition of J by the mask; original row order is kept within each block.
SplitJacobian split(const JacobianMatrix& jacobian, const RegionMask& mask);
/// Inverse of split.
Matrix merge(const SplitJacobian& parts);

/// M^T M.
SymmetricMatrix gram(const Matrix& block);

}  // namespace regionfac
