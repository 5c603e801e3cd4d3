#include "regionfac/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "regionfac/editor.hpp"
#include "regionfac/factorizer.hpp"
#include "regionfac/generators.hpp"
#include "regionfac/image.hpp"
#include "regionfac/interchange.hpp"
#include "regionfac/regions.hpp"

namespace regionfac::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::size_t to_size(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(token, &pos);
    if (pos != token.size() || v < 0) throw UsageError("");
    return static_cast<std::size_t>(v);
  } catch (...) {
    throw UsageError(std::string("invalid ") + what + " '" + token + "'");
  }
}

double to_double(const std::string& token, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size() || !std::isfinite(v)) throw UsageError("");
    return v;
  } catch (...) {
    throw UsageError(std::string("invalid ") + what + " '" + token + "'");
  }
}

/// "HxW" or "HxWxC".
ImageShape parse_shape(const std::string& text) {
  const auto parts = split_list(text, 'x');
  if (parts.size() != 2 && parts.size() != 3) throw UsageError("shape must be HxW or HxWxC, got '" + text + "'");
  ImageShape s{to_size(parts[0], "height"), to_size(parts[1], "width"),
               parts.size() == 3 ? to_size(parts[2], "channels") : 1};
  if (s.pixel_count() == 0) throw UsageError("shape must have at least one pixel");
  return s;
}

/// "top,left,bottom,right", half-open.
Box parse_box(const std::string& text) {
  const auto parts = split_list(text, ',');
  if (parts.size() != 4) throw UsageError("box must be top,left,bottom,right, got '" + text + "'");
  return Box{to_size(parts[0], "box top"), to_size(parts[1], "box left"), to_size(parts[2], "box bottom"),
             to_size(parts[3], "box right")};
}

std::vector<double> parse_reals(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& p : split_list(text, ',')) out.push_back(to_double(p, what));
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

/// "zero", "random:SEED", or a comma-separated list of K values.
LatentCode parse_latent(const std::string& text, std::size_t k) {
  if (text == "zero") return LatentCode(k, 0.0);
  if (text.rfind("random:", 0) == 0) {
    Rng rng(to_size(text.substr(7), "latent seed"));
    return normal_vector(rng, k);
  }
  auto values = parse_reals(text, "latent code");
  if (values.size() != k) {
    throw UsageError("latent code has " + std::to_string(values.size()) + " values, generator K is " +
                     std::to_string(k));
  }
  return values;
}

struct GeneratorFlags {
  std::string kind = "radial-blobs";
  std::size_t latent_dim = 12;
  std::string shape = "64x64x1";
  std::uint64_t seed = 0;
  std::string z = "zero";

  void add_to(CLI::App& app) {
    app.add_option("--kind", kind, "Generator kind: linear, mlp, radial-blobs")->capture_default_str();
    app.add_option("--latent-dim,-K", latent_dim, "Latent dimension K")->capture_default_str();
    app.add_option("--shape", shape, "Output shape HxW or HxWxC")->capture_default_str();
    app.add_option("--seed", seed, "Generator seed")->capture_default_str();
    app.add_option("--z", z, "Latent code: zero | random:SEED | v1,v2,...")->capture_default_str();
  }

  GeneratorSeedSpec spec() const {
    GeneratorSeedSpec s;
    s.kind = parse_generator_kind(kind);
    s.latent_dim = latent_dim;
    s.shape = parse_shape(shape);
    s.seed = seed;
    return s;
  }
};

struct MaskFlags {
  std::string mask_path;
  std::string box;
  std::string shape;

  void add_to(CLI::App& app) {
    auto* m = app.add_option("--mask", mask_path, "RSFM mask file");
    auto* b = app.add_option("--box", box, "Foreground box top,left,bottom,right (half-open)");
    m->excludes(b);
    app.add_option("--shape", shape, "Image shape HxW or HxWxC, needed with --box");
  }

  RegionMask load(std::optional<ImageShape> fallback_shape) const {
    if (!mask_path.empty()) return interchange::read_mask(mask_path);
    if (box.empty()) throw UsageError("either --mask or --box is required");
    std::optional<ImageShape> s = fallback_shape;
    if (!shape.empty()) s = parse_shape(shape);
    if (!s) throw UsageError("--box needs --shape");
    return mask_from_box(*s, parse_box(box));
  }
};

struct FactorFlags {
  std::string method = "fast";
  double tau = kDefaultTau;
  std::size_t top = kDefaultTop;
  double rank_tolerance = kDefaultRankTolerance;

  void add_to(CLI::App& app) {
    app.add_option("--method", method, "standard or fast")
        ->check(CLI::IsMember({"standard", "fast"}))
        ->capture_default_str();
    app.add_option("--tau", tau, "Regularization scale tau")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--top", top, "Number of directions to keep")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--rank-tolerance", rank_tolerance, "Relative singular-value cutoff for the fast path")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_latent_match(std::size_t generator_k, std::size_t directions_k) {
  if (generator_k != directions_k) {
    throw Error(ErrorCode::DimensionMismatch, "directions have K = " + std::to_string(directions_k) +
                                                  ", generator has K = " + std::to_string(generator_k));
  }
}

std::size_t directions_dim(const FactorizationResult& r) {
  if (r.directions.empty()) throw Error(ErrorCode::InvalidDirections, "directions file has no directions");
  return r.directions.front().vector.size();
}

int cmd_gen_toy(const GeneratorFlags& g, const std::string& out_prefix, std::ostream& out, std::ostream& err) {
  const ToyGenerator gen = make_generator(g.spec());
  const LatentCode z = parse_latent(g.z, gen.latent_dim());
  const JacobianMatrix jac{gen.jacobian(z), JacobianProvenance::ToyGenerator};
  const std::string jac_path = out_prefix + ".rsfj";
  interchange::write_jacobian(jac, jac_path);
  out << jac.pixel_count() << ' ' << jac.latent_dim() << '\n';
  const auto& shape = gen.shape();
  if (shape.channels == 1 || shape.channels == 3) {
    const auto [low, high] = gen.display_range();
    write_pnm(gen.generate(z), out_prefix + "." + pnm_extension(shape), low, high);
  } else {
    err << "note: no reference image for " << shape.channels << "-channel output\n";
  }
  return kOk;
}

int cmd_make_mask(const std::string& shape, const std::string& box, const std::string& path) {
  interchange::write_mask(mask_from_box(parse_shape(shape), parse_box(box)), path);
  return kOk;
}

int cmd_factorize(const std::string& jacobian_path, const MaskFlags& m, const FactorFlags& f,
                  const std::string& out_path, std::ostream& out) {
  const JacobianMatrix jac = interchange::read_jacobian(jacobian_path);
  const RegionMask mask = m.load(std::nullopt);
  FactorizeOptions options;
  options.method = parse_method(f.method);
  options.tau = f.tau;
  options.rank_tolerance = f.rank_tolerance;
  options.top = std::min(f.top, jac.latent_dim());
  const FactorizationResult result = factorize(split(jac, mask), options);
  if (!out_path.empty()) interchange::write_directions(result, jac.latent_dim(), out_path);
  for (const auto& d : result.directions) out << format17(d.eigenvalue) << '\n';
  return kOk;
}

int cmd_edit(const GeneratorFlags& g, const std::string& directions_path, std::size_t direction, double alpha,
             const std::string& out_path) {
  const ToyGenerator gen = make_generator(g.spec());
  const FactorizationResult dirs = interchange::read_directions(directions_path);
  require_latent_match(gen.latent_dim(), directions_dim(dirs));
  if (direction >= dirs.directions.size()) {
    throw UsageError("--direction " + std::to_string(direction) + " but the file has " +
                     std::to_string(dirs.directions.size()));
  }
  const LatentCode z = parse_latent(g.z, gen.latent_dim());
  const ImageBuffer img = edit(EditRequest{gen, z, dirs.directions[direction].vector, alpha});
  const auto [low, high] = gen.display_range();
  write_pnm(img, out_path, low, high);
  return kOk;
}

int cmd_sweep(const GeneratorFlags& g, const std::string& directions_path, const MaskFlags& m,
              const std::string& grid_text, const std::string& out_path, std::ostream& out) {
  const ToyGenerator gen = make_generator(g.spec());
  const FactorizationResult dirs = interchange::read_directions(directions_path);
  require_latent_match(gen.latent_dim(), directions_dim(dirs));
  const RegionMask mask = m.load(gen.shape());
  const LatentCode z = parse_latent(g.z, gen.latent_dim());
  const std::vector<double> grid =
      grid_text.empty() ? default_alpha_grid(dirs.directions.front().eigenvalue) : parse_reals(grid_text, "alpha grid");
  const SweepReport report = sweep(gen, z, dirs.directions, mask, grid);
  if (out_path.empty()) {
    write_sweep_csv(report, out);
  } else {
    std::ostringstream csv;
    write_sweep_csv(report, csv);
    write_text(out_path, csv.str());
  }
  return kOk;
}

int cmd_verify(const std::string& jacobian_path, const MaskFlags& m, const std::string& directions_path,
               std::ostream& out, std::ostream& err) {
  const JacobianMatrix jac = interchange::read_jacobian(jacobian_path);
  const RegionMask mask = m.load(std::nullopt);
  FactorizationResult dirs = interchange::read_directions(directions_path);
  require_latent_match(jac.latent_dim(), directions_dim(dirs));
  if (!(dirs.regularizer.tau > 0.0)) {
    throw Error(ErrorCode::InvalidDirections, "directions file carries no positive tau");
  }
  const SplitJacobian parts = split(jac, mask);
  const SymmetricMatrix a = gram(parts.foreground);
  const RegularizedGram b = regularize(gram(parts.background), dirs.regularizer.tau);
  const StationarityReport report = verify_stationarity(dirs, a, b.matrix);
  for (std::size_t i = 0; i < report.directions.size(); ++i) {
    const auto& d = report.directions[i];
    const bool ok = d.residual <= kStationarityTolerance && d.constraint_residual <= kStationarityTolerance;
    out << i << ' ' << format17(d.residual) << ' ' << format17(d.constraint_residual) << ' '
        << (ok ? "ok" : "fail") << '\n';
  }
  const auto failing = report.failing();
  if (!failing.empty()) {
    err << "verification failed for direction(s):";
    for (auto i : failing) err << ' ' << i;
    err << '\n';
    return kVerificationFailed;
  }
  return kOk;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DegenerateMask:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::NumericalInconsistency:
    case ErrorCode::SingularTriangular:
    case ErrorCode::EmptyMatrix:
    case ErrorCode::ZeroVector:
      return kDimension;
    case ErrorCode::ZeroBackgroundJacobian:
      return kZeroBackground;
    default:
      return kUsage;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-based latent direction discovery for toy and imported generator Jacobians", "regionfac"};
  app.require_subcommand(1);

  GeneratorFlags gen_flags;
  std::string out_prefix;
  auto* gen_toy = app.add_subcommand("gen-toy", "Write the Jacobian (RSFJ) and image of a toy generator");
  gen_flags.add_to(*gen_toy);
  gen_toy->add_option("--out", out_prefix, "Output prefix; writes PREFIX.rsfj and PREFIX.pgm/.ppm")->required();

  std::string mask_shape;
  std::string mask_box;
  std::string mask_out;
  auto* make_mask = app.add_subcommand("make-mask", "Write an RSFM mask from a box");
  make_mask->add_option("--shape", mask_shape, "Image shape HxW or HxWxC")->required();
  make_mask->add_option("--box", mask_box, "top,left,bottom,right (half-open)")->required();
  make_mask->add_option("--out", mask_out, "Output RSFM path")->required();

  std::string fac_jacobian;
  std::string fac_out;
  MaskFlags fac_mask;
  FactorFlags fac_flags;
  auto* fac = app.add_subcommand("factorize", "Find directions; prints eigenvalues, one per line");
  fac->add_option("jacobian", fac_jacobian, "RSFJ file")->required();
  fac_mask.add_to(*fac);
  fac_flags.add_to(*fac);
  fac->add_option("--out", fac_out, "Directions file to write");

  GeneratorFlags edit_gen;
  std::string edit_dirs;
  std::size_t edit_index = 0;
  double edit_alpha = 0.0;
  std::string edit_out;
  auto* edit_cmd = app.add_subcommand("edit", "Render G(z + alpha n) for one direction");
  edit_gen.add_to(*edit_cmd);
  edit_cmd->add_option("--directions", edit_dirs, "Directions file")->required();
  edit_cmd->add_option("--direction", edit_index, "Direction index")->capture_default_str();
  edit_cmd->add_option("--alpha", edit_alpha, "Edit strength")->required();
  edit_cmd->add_option("--out", edit_out, "Output PGM/PPM path")->required();

  GeneratorFlags sweep_gen;
  std::string sweep_dirs;
  MaskFlags sweep_mask;
  std::string sweep_grid;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Masked MSE in/out over an alpha grid (CSV)");
  sweep_gen.add_to(*sweep_cmd);
  sweep_cmd->add_option("--directions", sweep_dirs, "Directions file")->required();
  {
    auto* m = sweep_cmd->add_option("--mask", sweep_mask.mask_path, "RSFM mask file");
    auto* b = sweep_cmd->add_option("--box", sweep_mask.box, "Foreground box top,left,bottom,right");
    m->excludes(b);
  }
  sweep_cmd->add_option("--alpha-grid", sweep_grid, "Comma-separated alphas (default: 21 points in +-1/sqrt(lambda1))");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: standard output)");

  std::string ver_jacobian;
  std::string ver_dirs;
  MaskFlags ver_mask;
  auto* verify = app.add_subcommand("verify", "Check stationarity of a directions file; exit 5 on failure");
  verify->add_option("jacobian", ver_jacobian, "RSFJ file")->required();
  ver_mask.add_to(*verify);
  verify->add_option("--directions", ver_dirs, "Directions file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (app.got_subcommand(gen_toy)) return cmd_gen_toy(gen_flags, out_prefix, out, err);
    if (app.got_subcommand(make_mask)) return cmd_make_mask(mask_shape, mask_box, mask_out);
    if (app.got_subcommand(fac)) return cmd_factorize(fac_jacobian, fac_mask, fac_flags, fac_out, out);
    if (app.got_subcommand(edit_cmd)) return cmd_edit(edit_gen, edit_dirs, edit_index, edit_alpha, edit_out);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(sweep_gen, sweep_dirs, sweep_mask, sweep_grid, sweep_out, out);
    if (app.got_subcommand(verify)) return cmd_verify(ver_jacobian, ver_mask, ver_dirs, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace regionfac::cli
