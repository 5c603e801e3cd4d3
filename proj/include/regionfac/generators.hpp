#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "regionfac/matrix.hpp"

namespace regionfac {

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t pixel_count() const noexcept { return height * width * channels; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Pixels flattened channel-major, then row-major within a channel:
/// index = c * H * W + y * W + x.
struct ImageBuffer {
  ImageShape shape;
  std::vector<double> pixels;

  std::size_t index(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return (c * shape.height + y) * shape.width + x;
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const noexcept { return pixels[index(c, y, x)]; }
};

using LatentCode = std::vector<double>;

enum class GeneratorKind { Linear, Mlp, RadialBlobs };

std::string_view to_string(GeneratorKind kind) noexcept;
/// Accepts "linear", "mlp", "radial-blobs"; throws UnknownGeneratorKind.
GeneratorKind parse_generator_kind(std::string_view name);

struct GeneratorSeedSpec {
  GeneratorKind kind = GeneratorKind::RadialBlobs;
  std::size_t latent_dim = 12;
  ImageShape shape{64, 64, 1};
  std::uint64_t seed = 0;
};

/// G(z) = W z + b.
struct LinearParams {
  Matrix weights;  // P x K
  std::vector<double> bias;
};

/// G(z) = W2 tanh(W1 z + b1) + b2.
struct MlpParams {
  Matrix w1;  // H x K
  std::vector<double> b1;
  Matrix w2;  // P x H
  std::vector<double> b2;
};

/// One Gaussian blob driven by latents [3m, 3m+1, 3m+2]:
///   center = rest + shift_scale * (z_x, z_y)
///   amplitude = base_amplitude * (1 + 0.5 tanh(z_i))
///   profile = amplitude * exp(-|p - center|^2 / (2 width^2)),  width = radius / 3
/// `radius` is the locality radius scale: beyond 3 * radius the profile and
/// its latent derivatives are below 1e-15 of the amplitude.
struct Blob {
  double rest_y = 0.0;
  double rest_x = 0.0;
  double radius = 1.0;
  double base_amplitude = 1.0;
  double shift_scale = 1.0;

  double width() const noexcept { return radius / 3.0; }
};

struct RadialBlobsParams {
  std::vector<Blob> blobs;
};

using GeneratorParams = std::variant<LinearParams, MlpParams, RadialBlobsParams>;

/// Immutable toy generator G: R^K -> R^P with an analytic Jacobian.
class ToyGenerator {
 public:
  ToyGenerator(ImageShape shape, std::size_t latent_dim, GeneratorParams params);

  static ToyGenerator linear(ImageShape shape, Matrix weights, std::vector<double> bias);

  GeneratorKind kind() const noexcept;
  std::size_t latent_dim() const noexcept { return latent_dim_; }
  const ImageShape& shape() const noexcept { return shape_; }
  std::size_t pixel_count() const noexcept { return shape_.pixel_count(); }
  const GeneratorParams& params() const noexcept { return params_; }

  ImageBuffer generate(const LatentCode& z) const;
  /// P x K matrix of d pixel_j / d z_k.
  Matrix jacobian(const LatentCode& z) const;

  /// All parameters flattened in a fixed order (determinism checks).
  std::vector<double> parameter_buffer() const;

  /// Display range used when quantizing images of this generator.
  std::pair<double, double> display_range() const noexcept;

 private:
  void require_latent(const LatentCode& z) const;

  ImageShape shape_;
  std::size_t latent_dim_;
  GeneratorParams params_;
};

/// Deterministic construction from a seed: the same spec always yields
/// bitwise-identical parameters.
ToyGenerator make_generator(const GeneratorSeedSpec& spec);

/// Seeded engine used for every randomized construction in the toolkit.
using Rng = std::mt19937_64;

/// n standard-normal draws.
std::vector<double> normal_vector(Rng& rng, std::size_t n, double stddev = 1.0);

}  // namespace regionfac
