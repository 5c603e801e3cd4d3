#include "regionfac/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "regionfac/error.hpp"

namespace regionfac {

std::string pnm_extension(const ImageShape& shape) {
  if (shape.channels == 1) return "pgm";
  if (shape.channels == 3) return "ppm";
  throw Error(ErrorCode::InvalidArgument, "PNM output needs 1 or 3 channels, got " + std::to_string(shape.channels));
}

std::string encode_pnm(const ImageBuffer& image, double low, double high) {
  const std::string ext = pnm_extension(image.shape);
  if (!(high > low)) throw Error(ErrorCode::InvalidArgument, "display range must satisfy high > low");
  const auto quantize = [&](double v) {
    const double t = std::clamp((v - low) / (high - low), 0.0, 1.0);
    return static_cast<int>(std::lround(t * 255.0));
  };
  std::ostringstream out;
  out << (ext == "pgm" ? "P2" : "P3") << '\n'
      << image.shape.width << ' ' << image.shape.height << '\n'
      << 255 << '\n';
  for (std::size_t y = 0; y < image.shape.height; ++y) {
    for (std::size_t x = 0; x < image.shape.width; ++x) {
      for (std::size_t c = 0; c < image.shape.channels; ++c) {
        if (x != 0 || c != 0) out << ' ';
        out << quantize(image.at(c, y, x));
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_pnm(const ImageBuffer& image, const std::filesystem::path& path, double low, double high) {
  const std::string text = encode_pnm(image, low, high);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace regionfac
