#include "regionfac/regions.hpp"

#include <algorithm>
#include <string>

#include "regionfac/error.hpp"
#include "regionfac/kernels.hpp"

namespace regionfac {

RegionMask::RegionMask(std::vector<std::uint8_t> foreground) : flags_(std::move(foreground)) {
  for (auto& f : flags_) f = f != 0 ? 1 : 0;
  foreground_ = static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
  if (foreground_ == 0) throw Error(ErrorCode::DegenerateMask, "mask has no foreground pixels");
  if (foreground_ == flags_.size()) throw Error(ErrorCode::DegenerateMask, "mask has no background pixels");
}

RegionMask mask_from_box(const ImageShape& shape, const Box& box) {
  if (box.top > box.bottom || box.left > box.right || box.bottom > shape.height || box.right > shape.width) {
    throw Error(ErrorCode::InvalidBox, "box [" + std::to_string(box.top) + "," + std::to_string(box.bottom) +
                                           ")x[" + std::to_string(box.left) + "," + std::to_string(box.right) +
                                           ") is outside a " + std::to_string(shape.height) + "x" +
                                           std::to_string(shape.width) + " image");
  }
  std::vector<std::uint8_t> flags(shape.pixel_count(), 0);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t y = box.top; y < box.bottom; ++y) {
      for (std::size_t x = box.left; x < box.right; ++x) {
        flags[(c * shape.height + y) * shape.width + x] = 1;
      }
    }
  }
  return RegionMask(std::move(flags));
}

SplitJacobian split(const JacobianMatrix& jacobian, const RegionMask& mask) {
  const Matrix& j = jacobian.entries;
  if (mask.pixel_count() != j.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "mask length " + std::to_string(mask.pixel_count()) +
                                                  " != Jacobian rows " + std::to_string(j.rows()));
  }
  Matrix fg(mask.foreground_count(), j.cols());
  Matrix bg(mask.background_count(), j.cols());
  std::size_t f = 0;
  std::size_t b = 0;
  for (std::size_t i = 0; i < j.rows(); ++i) {
    const auto src = j.row(i);
    auto dst = mask.is_foreground(i) ? fg.row(f++) : bg.row(b++);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return SplitJacobian{std::move(fg), std::move(bg), mask};
}

Matrix merge(const SplitJacobian& parts) {
  const std::size_t k = parts.foreground.cols();
  Matrix j(parts.mask.pixel_count(), k);
  std::size_t f = 0;
  std::size_t b = 0;
  for (std::size_t i = 0; i < j.rows(); ++i) {
    const auto src = parts.mask.is_foreground(i) ? parts.foreground.row(f++) : parts.background.row(b++);
    std::copy(src.begin(), src.end(), j.row(i).begin());
  }
  return j;
}

SymmetricMatrix gram(const Matrix& block) { return SymmetricMatrix(kernels::gram(block)); }

}  // namespace regionfac
