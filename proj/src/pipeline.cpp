#include "vstep/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "vstep/errors.hpp"
#include "vstep/pgm.hpp"

namespace vstep {
namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out += ch;
    }
  }
  return out + "'";
}

}  // namespace

VariationalConfig default_reference_config() {
  VariationalConfig cfg;
  cfg.beta = kDefaultReferenceLambda;
  cfg.eta = 1e-2;
  cfg.outer_tol = 1e-3;
  cfg.max_outer = 100;
  cfg.inner_tol = 1e-4;
  cfg.max_inner = 200;
  return cfg;
}

void SmootherKind::validate() const {
  switch (variant) {
    case Variant::None:
      return;
    case Variant::ReferenceTV:
      if (!(lambda > 0.0)) throw ValidationError("reference smoother lambda must be positive");
      inner.validate();
      return;
    case Variant::External:
      if (command.empty()) throw ValidationError("external smoother needs a command template");
      if (command.find("{in}") == std::string::npos || command.find("{out}") == std::string::npos) {
        throw ValidationError("external smoother command must contain {in} and {out}");
      }
      return;
  }
}

std::string SmootherKind::name() const {
  switch (variant) {
    case Variant::None:
      return "none";
    case Variant::ReferenceTV:
      return "reftv";
    case Variant::External:
      return "external";
  }
  return "none";
}

void PipelineConfig::validate() const {
  rof.validate();
  if (variational) variational->validate();
  smoother.validate();
  if (repeat_count < 1) throw ValidationError("repeat count must be >= 1");
  if (residual_bins < 3) throw ValidationError("histogram needs at least 3 bins");
}

double default_beta(const NoiseSpec& spec) {
  return spec.r > 0.0 ? kBetaRandomValued : kBetaSaltPepper;
}

RofKind default_rof(const NoiseSpec& spec, int max_window) {
  RofKind kind;
  kind.variant = spec.r > 0.0 ? RofKind::Variant::AmfThenAcwmf : RofKind::Variant::Amf;
  kind.max_window = max_window;
  return kind;
}

GaussianizeResult gaussianize(const ImageGrid& x_n, const PipelineConfig& cfg) {
  cfg.validate();
  ImageGrid z = apply_rof(x_n, cfg.rof);
  PixelMask mask = detect_impulses(x_n, z);
  if (!cfg.variational) {
    ImageGrid out = z;
    return {std::move(z), std::move(mask), std::move(out), std::nullopt};
  }
  // x0 = x_n on clean sites and z on candidates; the two agree on clean sites.
  VstepResult solved = vstep(x_n, mask, *cfg.variational, z);
  ImageGrid out = solved.image;
  return {std::move(z), std::move(mask), std::move(out), std::move(solved)};
}

VstepResult reference_smoother(const ImageGrid& img, double lambda, const VariationalConfig& cfg) {
  if (!(lambda > 0.0)) throw ValidationError("reference smoother lambda must be positive");
  VariationalConfig inner = cfg;
  inner.beta = lambda;
  // Started at img itself the first linearization pins every site with weight
  // 1/sqrt(eta) and the relative-change test stops after one step; a 3x3
  // median start gives informative data weights.
  return vstep(img, PixelMask(img.height(), img.width(), true), inner, median_filter(img, 3));
}

ImageGrid run_external_smoother(const ImageGrid& img, const std::string& command_template) {
  if (command_template.find("{in}") == std::string::npos ||
      command_template.find("{out}") == std::string::npos) {
    throw ValidationError("smoother command must contain {in} and {out}");
  }
  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vstep-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  const auto in = dir / "in.pgm";
  const auto out = dir / "out.pgm";
  const auto log = dir / "log.txt";
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  write_pgm_file(in, img);
  std::string cmd = replace_all(command_template, "{in}", shell_quote(in.string()));
  cmd = replace_all(cmd, "{out}", shell_quote(out.string()));
  const int status = std::system(("(" + cmd + ") > " + shell_quote(log.string()) + " 2>&1").c_str());
  std::string output;
  if (std::ifstream f{log}) {
    std::ostringstream ss;
    ss << f.rdbuf();
    output = ss.str();
  }
  if (status != 0) {
    throw ExternalCommandError("external smoother exited with status " + std::to_string(status) +
                                   ": " + output,
                               output);
  }
  if (!std::filesystem::exists(out)) {
    throw ExternalCommandError("external smoother wrote no output to " + out.string() +
                                   (output.empty() ? "" : ": " + output),
                               output);
  }
  ImageGrid result = read_pgm_file(out);
  require_same_shape(img, result, "external smoother output");
  return result;
}

const Stage& DenoiseReport::stage(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s;
  }
  throw Error("no stage named " + name);
}

StageMetrics stage_metrics(const ImageGrid& clean, const ImageGrid& image,
                           const PipelineConfig& cfg) {
  const ImageGrid measured = cfg.quantize_metrics ? clamp_quantize(image, 0.0, 255.0) : image;
  return {psnr(clean, measured), ssim(clean, measured),
          residual_stats(clean, measured, cfg.residual_bins)};
}

DenoiseReport denoise(const ImageGrid& x_n, const std::optional<ImageGrid>& clean,
                      const PipelineConfig& cfg, std::optional<std::uint64_t> seed) {
  cfg.validate();
  if (clean) require_same_shape(*clean, x_n, "denoise");
  DenoiseReport report;
  report.config = cfg;
  report.seed = seed;
  report.stages.push_back({"noisy", x_n, 0.0, std::nullopt});

  Stopwatch rof_clock;
  ImageGrid z = apply_rof(x_n, cfg.rof);
  report.stages.push_back({"rof_out", z, rof_clock.seconds(), std::nullopt});

  const PixelMask mask = detect_impulses(x_n, z);
  report.candidate_count = mask.candidate_count();

  Stopwatch vstep_clock;
  ImageGrid gaussianized = z;
  if (cfg.variational) {
    report.vstep = vstep(x_n, mask, *cfg.variational, z);
    gaussianized = report.vstep->image;
  }
  report.stages.push_back({"vstep_out", gaussianized, vstep_clock.seconds(), std::nullopt});

  Stopwatch smooth_clock;
  ImageGrid final_image = gaussianized;
  switch (cfg.smoother.variant) {
    case SmootherKind::Variant::None:
      break;
    case SmootherKind::Variant::ReferenceTV:
      report.smoother = reference_smoother(gaussianized, cfg.smoother.lambda, cfg.smoother.inner);
      final_image = report.smoother->image;
      break;
    case SmootherKind::Variant::External:
      final_image = run_external_smoother(gaussianized, cfg.smoother.command);
      break;
  }
  report.stages.push_back({"final", std::move(final_image), smooth_clock.seconds(), std::nullopt});

  if (clean) {
    for (auto& s : report.stages) s.metrics = stage_metrics(*clean, s.image, cfg);
  }
  return report;
}

}  // namespace vstep
