#pragma once

#include <filesystem>
#include <string>

#include "regionfac/generators.hpp"

namespace regionfac {

/// Plain-text PGM (1 channel) or PPM (3 channels), 8-bit. Values are mapped
/// linearly from [low, high] to [0, 255], clamped, and rounded.
std::string encode_pnm(const ImageBuffer& image, double low, double high);
void write_pnm(const ImageBuffer& image, const std::filesystem::path& path, double low, double high);

/// "pgm" or "ppm" for 1- or 3-channel images; throws InvalidArgument otherwise.
std::string pnm_extension(const ImageShape& shape);

}  // namespace regionfac
