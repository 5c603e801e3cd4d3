#include "regionfac/interchange.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "regionfac/error.hpp"

namespace regionfac::interchange {

namespace {

constexpr char kJacobianMagic[4] = {'R', 'S', 'F', 'J'};
constexpr char kMaskMagic[4] = {'R', 'S', 'F', 'M'};
constexpr std::string_view kDirectionsMagic = "regionfac-directions";

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t count) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < count; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return v;
}

bool has_magic(std::span<const std::uint8_t> bytes, const char (&magic)[4]) {
  const std::size_t n = std::min<std::size_t>(4, bytes.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(magic[i])) return false;
  }
  return true;
}

// Checks magic, version, and that at least `header` bytes exist.
void check_preamble(std::span<const std::uint8_t> bytes, const char (&magic)[4], std::size_t header,
                    ErrorCode wrong_magic, const char* what) {
  if (!has_magic(bytes, magic)) throw Error(wrong_magic, std::string("missing ") + what + " magic");
  if (bytes.size() < header) {
    throw Error(ErrorCode::TruncatedFile, std::string(what) + " header is truncated");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, std::string(what) + " version " + std::to_string(version));
  }
}

void check_payload_size(std::size_t available, std::uint64_t count, std::uint64_t width, const char* what) {
  if (count > std::numeric_limits<std::uint64_t>::max() / width) {
    throw Error(ErrorCode::InvalidHeader, std::string(what) + " payload size overflows");
  }
  const std::uint64_t needed = count * width;
  if (available < needed) {
    throw Error(ErrorCode::TruncatedFile, std::string(what) + " payload needs " + std::to_string(needed) +
                                              " bytes, file has " + std::to_string(available));
  }
  if (available > needed) {
    throw Error(ErrorCode::InvalidHeader, std::string(what) + " has " + std::to_string(available - needed) +
                                              " bytes beyond the declared payload");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

[[noreturn]] void bad_directions(const std::string& why) { throw Error(ErrorCode::InvalidDirections, why); }

double parse_double(const std::string& token) {
  if (token.empty()) bad_directions("empty number");
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size()) bad_directions("malformed number '" + token + "'");
  if (!std::isfinite(v)) bad_directions("non-finite number '" + token + "'");
  return v;
}

std::size_t parse_count(const std::string& token) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) bad_directions("malformed count '" + token + "'");
  return v;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::vector<std::string> next(std::string_view expected_key) {
    std::string line;
    if (!std::getline(in_, line)) bad_directions("unexpected end of file, expected '" + std::string(expected_key) + "'");
    std::istringstream ls(line);
    std::vector<std::string> tokens{std::istream_iterator<std::string>(ls), std::istream_iterator<std::string>()};
    if (tokens.empty() || tokens.front() != expected_key) {
      bad_directions("expected '" + std::string(expected_key) + "' line");
    }
    return tokens;
  }

  bool at_end() {
    std::string rest;
    while (std::getline(in_, rest)) {
      if (rest.find_first_not_of(" \t\r") != std::string::npos) return false;
    }
    return true;
  }

 private:
  std::istringstream in_;
};

std::vector<std::string> expect_tokens(LineReader& reader, std::string_view key, std::size_t count) {
  auto tokens = reader.next(key);
  if (tokens.size() != count) bad_directions("line '" + std::string(key) + "' has the wrong number of fields");
  return tokens;
}

}  // namespace

std::vector<std::uint8_t> encode_jacobian(const Matrix& jacobian, Dtype dtype) {
  std::vector<std::uint8_t> out;
  const std::size_t width = dtype == Dtype::Float64 ? 8 : 4;
  out.reserve(kJacobianHeaderBytes + jacobian.data().size() * width);
  out.insert(out.end(), std::begin(kJacobianMagic), std::end(kJacobianMagic));
  put_le(out, kFormatVersion, 4);
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(0);  // row-major
  out.push_back(0);
  out.push_back(0);
  put_le(out, jacobian.rows(), 8);
  put_le(out, jacobian.cols(), 8);
  for (double v : jacobian.data()) {
    if (dtype == Dtype::Float64) {
      put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    } else {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
  }
  return out;
}

JacobianMatrix decode_jacobian(std::span<const std::uint8_t> bytes) {
  check_preamble(bytes, kJacobianMagic, kJacobianHeaderBytes, ErrorCode::NotAJacobianFile, "RSFJ");
  const std::uint8_t dtype = bytes[8];
  if (dtype > 1) throw Error(ErrorCode::InvalidHeader, "RSFJ dtype " + std::to_string(dtype));
  if (bytes[9] != 0) throw Error(ErrorCode::InvalidHeader, "RSFJ layout " + std::to_string(bytes[9]));
  if (bytes[10] != 0 || bytes[11] != 0) throw Error(ErrorCode::InvalidHeader, "RSFJ reserved bytes are not zero");
  const std::uint64_t p = get_le(bytes, 12, 8);
  const std::uint64_t k = get_le(bytes, 20, 8);
  if (p == 0 || k == 0) throw Error(ErrorCode::InvalidHeader, "RSFJ needs P >= 1 and K >= 1");
  if (p > std::numeric_limits<std::uint64_t>::max() / k) {
    throw Error(ErrorCode::InvalidHeader, "RSFJ P*K overflows");
  }
  const std::size_t width = dtype == 1 ? 8 : 4;
  check_payload_size(bytes.size() - kJacobianHeaderBytes, p * k, width, "RSFJ");

  std::vector<double> values(p * k);
  std::size_t offset = kJacobianHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i, offset += width) {
    const double v = width == 8 ? std::bit_cast<double>(get_le(bytes, offset, 8))
                                : static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes, offset, 4))));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidPayload, "RSFJ payload has a non-finite value at entry " + std::to_string(i), i);
    }
    values[i] = v;
  }
  return JacobianMatrix{Matrix(p, k, std::move(values)), JacobianProvenance::Imported};
}

std::vector<std::uint8_t> encode_mask(const RegionMask& mask) {
  std::vector<std::uint8_t> out;
  out.reserve(kMaskHeaderBytes + mask.pixel_count());
  out.insert(out.end(), std::begin(kMaskMagic), std::end(kMaskMagic));
  put_le(out, kFormatVersion, 4);
  put_le(out, mask.pixel_count(), 8);
  out.insert(out.end(), mask.flags().begin(), mask.flags().end());
  return out;
}

RegionMask decode_mask(std::span<const std::uint8_t> bytes) {
  check_preamble(bytes, kMaskMagic, kMaskHeaderBytes, ErrorCode::NotAMaskFile, "RSFM");
  const std::uint64_t p = get_le(bytes, 8, 8);
  if (p == 0) throw Error(ErrorCode::InvalidHeader, "RSFM needs P >= 1");
  check_payload_size(bytes.size() - kMaskHeaderBytes, p, 1, "RSFM");
  const auto payload = bytes.subspan(kMaskHeaderBytes);
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (payload[i] > 1) {
      throw Error(ErrorCode::InvalidMaskValue, "RSFM byte " + std::to_string(payload[i]) + " at pixel " + std::to_string(i), i);
    }
  }
  return RegionMask(std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

std::string encode_directions(const FactorizationResult& result, std::size_t latent_dim) {
  std::ostringstream out;
  out << kDirectionsMagic << ' ' << kFormatVersion << '\n'
      << "K " << latent_dim << '\n'
      << "method " << to_string(result.method) << '\n'
      << "tau " << format_double(result.regularizer.tau) << '\n'
      << "a " << format_double(result.regularizer.a) << '\n'
      << "retained_rank " << result.retained_rank << '\n'
      << "count " << result.directions.size() << '\n';
  for (std::size_t i = 0; i < result.directions.size(); ++i) {
    const auto& d = result.directions[i];
    if (d.vector.size() != latent_dim) {
      throw Error(ErrorCode::DimensionMismatch, "direction length differs from K");
    }
    const bool has_diag = i < result.diagnostics.directions.size();
    const DirectionDiagnostics diag = has_diag ? result.diagnostics.directions[i] : DirectionDiagnostics{};
    out << "direction " << d.rank_index << " eigenvalue " << format_double(d.eigenvalue) << " residual "
        << format_double(diag.residual) << " b_norm " << format_double(d.b_norm) << " cluster "
        << diag.cluster_id << '\n';
    out << "vector";
    for (double v : d.vector) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

FactorizationResult decode_directions(const std::string& text) {
  LineReader reader(text);
  {
    std::string first = text.substr(0, text.find('\n'));
    if (first.rfind(kDirectionsMagic, 0) != 0) throw Error(ErrorCode::NotADirectionsFile, "missing directions header");
  }
  const auto header = expect_tokens(reader, kDirectionsMagic, 2);
  if (parse_count(header[1]) != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "directions version " + header[1]);
  }
  FactorizationResult result;
  const std::size_t k = parse_count(expect_tokens(reader, "K", 2)[1]);
  if (k == 0) bad_directions("K must be >= 1");
  try {
    result.method = parse_method(expect_tokens(reader, "method", 2)[1]);
  } catch (const Error&) {
    bad_directions("unknown method");
  }
  result.regularizer.tau = parse_double(expect_tokens(reader, "tau", 2)[1]);
  result.regularizer.a = parse_double(expect_tokens(reader, "a", 2)[1]);
  if (result.regularizer.tau < 0.0 || result.regularizer.a < 0.0) bad_directions("negative regularizer");
  result.retained_rank = parse_count(expect_tokens(reader, "retained_rank", 2)[1]);
  if (result.retained_rank > k) bad_directions("retained_rank exceeds K");
  const std::size_t count = parse_count(expect_tokens(reader, "count", 2)[1]);
  if (count > k) bad_directions("more directions than K");

  for (std::size_t i = 0; i < count; ++i) {
    const auto rec = expect_tokens(reader, "direction", 10);
    if (rec[2] != "eigenvalue" || rec[4] != "residual" || rec[6] != "b_norm" || rec[8] != "cluster") {
      bad_directions("malformed direction record");
    }
    SemanticDirection d;
    d.rank_index = parse_count(rec[1]);
    if (d.rank_index != i) bad_directions("direction records out of order");
    d.eigenvalue = parse_double(rec[3]);
    if (d.eigenvalue < 0.0) bad_directions("negative eigenvalue");
    if (i > 0 && d.eigenvalue > result.directions.back().eigenvalue) bad_directions("eigenvalues not descending");
    DirectionDiagnostics diag;
    diag.residual = parse_double(rec[5]);
    d.b_norm = parse_double(rec[7]);
    diag.cluster_id = parse_count(rec[9]);
    diag.constraint_residual = std::abs(d.b_norm - 1.0);

    const auto vec = expect_tokens(reader, "vector", k + 1);
    d.vector.reserve(k);
    for (std::size_t j = 1; j <= k; ++j) d.vector.push_back(parse_double(vec[j]));
    if (std::abs(norm2(d.vector) - 1.0) > kUnitNormTolerance) {
      bad_directions("direction " + std::to_string(i) + " is not unit length");
    }
    result.directions.push_back(std::move(d));
    result.diagnostics.directions.push_back(diag);
  }
  expect_tokens(reader, "end", 1);
  if (!reader.at_end()) bad_directions("content after 'end'");
  return result;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_jacobian(const JacobianMatrix& jacobian, const std::filesystem::path& path, Dtype dtype) {
  write_file_bytes(path, encode_jacobian(jacobian.entries, dtype));
}

JacobianMatrix read_jacobian(const std::filesystem::path& path) { return decode_jacobian(read_file_bytes(path)); }

void write_mask(const RegionMask& mask, const std::filesystem::path& path) { write_file_bytes(path, encode_mask(mask)); }

RegionMask read_mask(const std::filesystem::path& path) { return decode_mask(read_file_bytes(path)); }

void write_directions(const FactorizationResult& result, std::size_t latent_dim, const std::filesystem::path& path) {
  const std::string text = encode_directions(result, latent_dim);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

FactorizationResult read_directions(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_directions(std::string(bytes.begin(), bytes.end()));
}

}  // namespace regionfac::interchange
