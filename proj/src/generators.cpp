#include "regionfac/generators.hpp"

#include <cmath>

#include "regionfac/error.hpp"
#include "regionfac/kernels.hpp"

namespace regionfac {

namespace {

constexpr std::size_t kMlpHidden = 16;
constexpr std::size_t kLatentsPerBlob = 3;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  return Matrix(rows, cols, normal_vector(rng, rows * cols, stddev));
}

void require_spec(const GeneratorSeedSpec& spec) {
  if (spec.latent_dim == 0) throw Error(ErrorCode::InvalidArgument, "latent dimension K must be >= 1");
  if (spec.shape.pixel_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "image shape must have at least one pixel");
  }
}

RadialBlobsParams make_blobs(Rng& rng, const GeneratorSeedSpec& spec) {
  if (spec.latent_dim % kLatentsPerBlob != 0) {
    throw Error(ErrorCode::InvalidArgument, "radial-blobs needs K divisible by 3 (x, y, intensity per blob)");
  }
  const std::size_t count = spec.latent_dim / kLatentsPerBlob;
  std::size_t grid = 1;
  while (grid * grid < count) ++grid;
  const double cell_h = static_cast<double>(spec.shape.height) / static_cast<double>(grid);
  const double cell_w = static_cast<double>(spec.shape.width) / static_cast<double>(grid);
  const double cell = std::min(cell_h, cell_w);

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  RadialBlobsParams params;
  params.blobs.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    const auto gy = static_cast<double>(m / grid);
    const auto gx = static_cast<double>(m % grid);
    Blob b;
    b.rest_y = (gy + 0.5) * cell_h - 0.5 + 0.05 * cell * unit(rng);
    b.rest_x = (gx + 0.5) * cell_w - 0.5 + 0.05 * cell * unit(rng);
    b.radius = cell * (0.12 + 0.01 * unit(rng));
    b.base_amplitude = 0.75 + 0.25 * unit(rng);
    b.shift_scale = 0.03 * cell;
    params.blobs.push_back(b);
  }
  return params;
}

}  // namespace

std::vector<double> normal_vector(Rng& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

std::string_view to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::Linear: return "linear";
    case GeneratorKind::Mlp: return "mlp";
    case GeneratorKind::RadialBlobs: return "radial-blobs";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "linear") return GeneratorKind::Linear;
  if (name == "mlp") return GeneratorKind::Mlp;
  if (name == "radial-blobs") return GeneratorKind::RadialBlobs;
  throw Error(ErrorCode::UnknownGeneratorKind, "unknown generator kind '" + std::string(name) + "'");
}

ToyGenerator::ToyGenerator(ImageShape shape, std::size_t latent_dim, GeneratorParams params)
    : shape_(shape), latent_dim_(latent_dim), params_(std::move(params)) {
  if (latent_dim_ == 0 || shape_.pixel_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "generator needs K >= 1 and P >= 1");
  }
  const std::size_t p = shape_.pixel_count();
  std::visit(Overloaded{
                 [&](const LinearParams& lin) {
                   if (lin.weights.rows() != p || lin.weights.cols() != latent_dim_ || lin.bias.size() != p) {
                     throw Error(ErrorCode::DimensionMismatch, "linear generator weights must be P x K");
                   }
                 },
                 [&](const MlpParams& mlp) {
                   if (mlp.w1.cols() != latent_dim_ || mlp.b1.size() != mlp.w1.rows() ||
                       mlp.w2.rows() != p || mlp.w2.cols() != mlp.w1.rows() || mlp.b2.size() != p) {
                     throw Error(ErrorCode::DimensionMismatch, "mlp generator layer shapes disagree");
                   }
                 },
                 [&](const RadialBlobsParams& blobs) {
                   if (blobs.blobs.size() * kLatentsPerBlob != latent_dim_) {
                     throw Error(ErrorCode::DimensionMismatch, "radial-blobs needs 3 latents per blob");
                   }
                 },
             },
             params_);
}

ToyGenerator ToyGenerator::linear(ImageShape shape, Matrix weights, std::vector<double> bias) {
  const std::size_t k = weights.cols();
  return ToyGenerator(shape, k, LinearParams{std::move(weights), std::move(bias)});
}

GeneratorKind ToyGenerator::kind() const noexcept {
  return std::visit(Overloaded{
                        [](const LinearParams&) { return GeneratorKind::Linear; },
                        [](const MlpParams&) { return GeneratorKind::Mlp; },
                        [](const RadialBlobsParams&) { return GeneratorKind::RadialBlobs; },
                    },
                    params_);
}

void ToyGenerator::require_latent(const LatentCode& z) const {
  if (z.size() != latent_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "latent length " + std::to_string(z.size()) +
                                                  " != generator K " + std::to_string(latent_dim_));
  }
  for (double v : z) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "latent code contains NaN or Inf");
  }
}

ImageBuffer ToyGenerator::generate(const LatentCode& z) const {
  require_latent(z);
  ImageBuffer img{shape_, std::vector<double>(shape_.pixel_count())};
  const auto p = static_cast<std::ptrdiff_t>(img.pixels.size());
  std::visit(Overloaded{
                 [&](const LinearParams& lin) {
#pragma omp parallel for schedule(static)
                   for (std::ptrdiff_t j = 0; j < p; ++j) {
                     img.pixels[j] = lin.bias[j] + dot(lin.weights.row(j), z);
                   }
                 },
                 [&](const MlpParams& mlp) {
                   std::vector<double> hidden(mlp.w1.rows());
                   for (std::size_t h = 0; h < hidden.size(); ++h) {
                     hidden[h] = std::tanh(mlp.b1[h] + dot(mlp.w1.row(h), z));
                   }
#pragma omp parallel for schedule(static)
                   for (std::ptrdiff_t j = 0; j < p; ++j) {
                     img.pixels[j] = mlp.b2[j] + dot(mlp.w2.row(j), hidden);
                   }
                 },
                 [&](const RadialBlobsParams& rb) {
                   const std::size_t plane = shape_.height * shape_.width;
                   const auto plane_signed = static_cast<std::ptrdiff_t>(plane);
#pragma omp parallel for schedule(static)
                   for (std::ptrdiff_t q = 0; q < plane_signed; ++q) {
                     const auto y = static_cast<double>(static_cast<std::size_t>(q) / shape_.width);
                     const auto x = static_cast<double>(static_cast<std::size_t>(q) % shape_.width);
                     double v = 0.0;
                     for (std::size_t m = 0; m < rb.blobs.size(); ++m) {
                       const Blob& b = rb.blobs[m];
                       const double* zm = z.data() + m * kLatentsPerBlob;
                       const double cx = b.rest_x + b.shift_scale * zm[0];
                       const double cy = b.rest_y + b.shift_scale * zm[1];
                       const double amp = b.base_amplitude * (1.0 + 0.5 * std::tanh(zm[2]));
                       const double w = b.width();
                       const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                       v += amp * std::exp(-r2 / (2.0 * w * w));
                     }
                     for (std::size_t c = 0; c < shape_.channels; ++c) img.pixels[c * plane + q] = v;
                   }
                 },
             },
             params_);
  return img;
}

Matrix ToyGenerator::jacobian(const LatentCode& z) const {
  require_latent(z);
  return std::visit(
      Overloaded{
          [&](const LinearParams& lin) { return lin.weights; },
          [&](const MlpParams& mlp) {
            // J = W2 diag(1 - h^2) W1
            Matrix scaled_w1 = mlp.w1;
            for (std::size_t h = 0; h < scaled_w1.rows(); ++h) {
              const double t = std::tanh(mlp.b1[h] + dot(mlp.w1.row(h), z));
              const double slope = 1.0 - t * t;
              for (double& v : scaled_w1.row(h)) v *= slope;
            }
            return kernels::matmul(mlp.w2, scaled_w1);
          },
          [&](const RadialBlobsParams& rb) {
            Matrix jac(shape_.pixel_count(), latent_dim_);
            const std::size_t plane = shape_.height * shape_.width;
            const auto plane_signed = static_cast<std::ptrdiff_t>(plane);
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t q = 0; q < plane_signed; ++q) {
              const auto y = static_cast<double>(static_cast<std::size_t>(q) / shape_.width);
              const auto x = static_cast<double>(static_cast<std::size_t>(q) % shape_.width);
              auto row = jac.row(static_cast<std::size_t>(q));
              for (std::size_t m = 0; m < rb.blobs.size(); ++m) {
                const Blob& b = rb.blobs[m];
                const double* zm = z.data() + m * kLatentsPerBlob;
                const double cx = b.rest_x + b.shift_scale * zm[0];
                const double cy = b.rest_y + b.shift_scale * zm[1];
                const double t = std::tanh(zm[2]);
                const double amp = b.base_amplitude * (1.0 + 0.5 * t);
                const double w2 = b.width() * b.width();
                const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double profile = std::exp(-r2 / (2.0 * w2));
                row[m * kLatentsPerBlob + 0] = amp * profile * (x - cx) / w2 * b.shift_scale;
                row[m * kLatentsPerBlob + 1] = amp * profile * (y - cy) / w2 * b.shift_scale;
                row[m * kLatentsPerBlob + 2] = b.base_amplitude * 0.5 * (1.0 - t * t) * profile;
              }
            }
            for (std::size_t c = 1; c < shape_.channels; ++c) {
              for (std::size_t q = 0; q < plane; ++q) {
                auto src = jac.row(q);
                auto dst = jac.row(c * plane + q);
                std::copy(src.begin(), src.end(), dst.begin());
              }
            }
            return jac;
          },
      },
      params_);
}

std::vector<double> ToyGenerator::parameter_buffer() const {
  std::vector<double> out;
  auto append = [&](std::span<const double> values) { out.insert(out.end(), values.begin(), values.end()); };
  std::visit(Overloaded{
                 [&](const LinearParams& lin) {
                   append(lin.weights.data());
                   append(lin.bias);
                 },
                 [&](const MlpParams& mlp) {
                   append(mlp.w1.data());
                   append(mlp.b1);
                   append(mlp.w2.data());
                   append(mlp.b2);
                 },
                 [&](const RadialBlobsParams& rb) {
                   for (const Blob& b : rb.blobs) {
                     append(std::vector<double>{b.rest_y, b.rest_x, b.radius, b.base_amplitude, b.shift_scale});
                   }
                 },
             },
             params_);
  return out;
}

std::pair<double, double> ToyGenerator::display_range() const noexcept {
  if (kind() == GeneratorKind::RadialBlobs) return {0.0, 1.5};
  return {-2.0, 2.0};
}

ToyGenerator make_generator(const GeneratorSeedSpec& spec) {
  require_spec(spec);
  Rng rng(spec.seed);
  const std::size_t k = spec.latent_dim;
  const std::size_t p = spec.shape.pixel_count();
  switch (spec.kind) {
    case GeneratorKind::Linear: {
      Matrix w = random_matrix(rng, p, k, 1.0 / std::sqrt(static_cast<double>(k)));
      auto bias = normal_vector(rng, p, 0.1);
      return ToyGenerator(spec.shape, k, LinearParams{std::move(w), std::move(bias)});
    }
    case GeneratorKind::Mlp: {
      MlpParams mlp;
      mlp.w1 = random_matrix(rng, kMlpHidden, k, 1.0 / std::sqrt(static_cast<double>(k)));
      mlp.b1 = normal_vector(rng, kMlpHidden, 0.1);
      mlp.w2 = random_matrix(rng, p, kMlpHidden, 1.0 / std::sqrt(static_cast<double>(kMlpHidden)));
      mlp.b2 = normal_vector(rng, p, 0.1);
      return ToyGenerator(spec.shape, k, std::move(mlp));
    }
    case GeneratorKind::RadialBlobs:
      return ToyGenerator(spec.shape, k, make_blobs(rng, spec));
  }
  throw Error(ErrorCode::UnknownGeneratorKind, "unsupported generator kind");
}

}  // namespace regionfac
