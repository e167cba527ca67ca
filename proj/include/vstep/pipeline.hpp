#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vstep/errors.hpp"
#include "vstep/image.hpp"
#include "vstep/metrics.hpp"
#include "vstep/noise.hpp"
#include "vstep/rof.hpp"
#include "vstep/variational.hpp"

namespace vstep {

/// Regularization weight of the built-in l1-TV smoother, chosen by grid search
/// on σ = 25 AWGN (see tools/tune_reftv.cpp and README).
inline constexpr double kDefaultReferenceLambda = 0.35;

/// Solver controls of the built-in smoother. beta is replaced by lambda.
VariationalConfig default_reference_config();

struct SmootherKind {
  enum class Variant { None, ReferenceTV, External };
  Variant variant = Variant::None;
  double lambda = kDefaultReferenceLambda;
  VariationalConfig inner = default_reference_config();
  /// Shell command with {in} and {out} placeholders replaced by PGM paths.
  std::string command;

  void validate() const;
  std::string name() const;
};

struct PipelineConfig {
  RofKind rof;
  std::optional<VariationalConfig> variational = VariationalConfig{};
  SmootherKind smoother;
  int repeat_count = 5;
  /// Quantize stage images to 8-bit levels before computing metrics.
  bool quantize_metrics = false;
  std::size_t residual_bins = 101;

  void validate() const;
};

/// beta = 0.002 when random-valued impulses are present, 0.0002 otherwise.
double default_beta(const NoiseSpec& spec);
/// AMF for salt-and-pepper only, AMF followed by ACWMF when r > 0.
RofKind default_rof(const NoiseSpec& spec, int max_window = kDefaultAmfWindow);

struct GaussianizeResult {
  ImageGrid rof_out;
  PixelMask mask;
  ImageGrid output;
  std::optional<VstepResult> solve;
};

/// z = ROF(x_n), mask = detect_impulses(x_n, z), then the variational step
/// started from x_n on clean sites and z on candidates (which is z itself).
GaussianizeResult gaussianize(const ImageGrid& x_n, const PipelineConfig& cfg);

/// Smoothed l1-TV with full data fidelity: the variational machinery run with
/// an all-clean mask and beta = lambda, iterated from the 3x3 median of img.
VstepResult reference_smoother(const ImageGrid& img, double lambda,
                               const VariationalConfig& cfg = default_reference_config());

/// Runs an external denoiser through its command template.
ImageGrid run_external_smoother(const ImageGrid& img, const std::string& command_template);

/// Thrown when an external smoother exits non-zero; carries its output.
class ExternalCommandError : public Error {
 public:
  ExternalCommandError(const std::string& what, std::string output)
      : Error(what), output_(std::move(output)) {}
  const std::string& output() const noexcept { return output_; }

 private:
  std::string output_;
};

struct StageMetrics {
  double psnr_db = 0.0;
  double ssim = 0.0;
  ResidualStats residual;
};

struct Stage {
  std::string name;  ///< noisy, rof_out, vstep_out, final
  ImageGrid image;
  double seconds = 0.0;
  std::optional<StageMetrics> metrics;
};

struct DenoiseReport {
  std::vector<Stage> stages;
  std::size_t candidate_count = 0;
  std::optional<VstepResult> vstep;
  std::optional<VstepResult> smoother;
  PipelineConfig config;
  std::optional<std::uint64_t> seed;

  const Stage& stage(const std::string& name) const;
  const ImageGrid& final_image() const { return stage("final").image; }
};

/// Metrics of one image against the clean reference, following cfg's
/// quantization and histogram settings.
StageMetrics stage_metrics(const ImageGrid& clean, const ImageGrid& image,
                           const PipelineConfig& cfg);

/// ROF -> variational step -> smoother. Metrics are filled only when clean is given.
DenoiseReport denoise(const ImageGrid& x_n, const std::optional<ImageGrid>& clean,
                      const PipelineConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace vstep
