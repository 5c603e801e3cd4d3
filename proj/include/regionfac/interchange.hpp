#pragma once

// File formats shared with external Jacobian producers.
//
// RSFJ (Jacobian), little-endian:
//   0  char[4] "RSFJ"
//   4  u32     version = 1
//   8  u8      dtype   (0 = float32, 1 = float64)
//   9  u8      layout  (0 = row-major)
//   10 u8[2]   reserved, zero
//   12 u64     P
//   20 u64     K
//   28 P*K values in dtype
//
// RSFM (mask), little-endian:
//   0  char[4] "RSFM"
//   4  u32     version = 1
//   8  u64     P
//   16 u8[P]   0 = background, 1 = foreground
//
// Directions: UTF-8 text, one key per line, numbers with 17 significant
// digits. See write_directions for the exact layout.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "regionfac/factorizer.hpp"
#include "regionfac/regions.hpp"

namespace regionfac::interchange {

enum class Dtype : std::uint8_t { Float32 = 0, Float64 = 1 };

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kJacobianHeaderBytes = 28;
inline constexpr std::size_t kMaskHeaderBytes = 16;
/// Accepted deviation from unit norm for direction vectors on load.
inline constexpr double kUnitNormTolerance = 1e-9;

std::vector<std::uint8_t> encode_jacobian(const Matrix& jacobian, Dtype dtype = Dtype::Float64);
/// Float32 payloads are widened to double.
JacobianMatrix decode_jacobian(std::span<const std::uint8_t> bytes);
void write_jacobian(const JacobianMatrix& jacobian, const std::filesystem::path& path,
                    Dtype dtype = Dtype::Float64);
JacobianMatrix read_jacobian(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_mask(const RegionMask& mask);
RegionMask decode_mask(std::span<const std::uint8_t> bytes);
void write_mask(const RegionMask& mask, const std::filesystem::path& path);
RegionMask read_mask(const std::filesystem::path& path);

/// The latent dimension is taken from the direction vectors.
std::string encode_directions(const FactorizationResult& result, std::size_t latent_dim);
FactorizationResult decode_directions(const std::string& text);
void write_directions(const FactorizationResult& result, std::size_t latent_dim, const std::filesystem::path& path);
FactorizationResult read_directions(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace regionfac::interchange
