#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vstep/image.hpp"
#include "vstep/noise.hpp"
#include "vstep/pipeline.hpp"

namespace vstep {

struct NamedImage {
  std::string name;
  ImageGrid image;
};

/// A pipeline under test. Unset rof / beta follow the noise spec of each cell
/// (default_rof, default_beta).
struct Method {
  std::string name;
  PipelineConfig config;
  bool auto_rof = true;
  bool auto_beta = true;
  /// Method whose metrics the percentage increase is measured against.
  std::string baseline;

  PipelineConfig resolve(const NoiseSpec& spec) const;
};

struct ExperimentCell {
  std::string image;
  NoiseSpec noise;
  std::string method;
  std::size_t seed_count = 0;
  double psnr_mean = 0.0;
  double ssim_mean = 0.0;
  std::vector<double> psnr_per_seed;
  std::vector<double> ssim_per_seed;
  std::optional<double> pct_increase_psnr;
  std::optional<double> pct_increase_ssim;
  std::string error;  ///< empty when the cell ran
};

struct ExperimentTable {
  std::vector<ExperimentCell> rows;

  /// image,sigma,p,r,method,seed_count,psnr_mean,ssim_mean,pct_increase_psnr,pct_increase_ssim
  std::string csv() const;
  std::string json() const;
  const ExperimentCell* find(std::string_view image, const NoiseSpec& noise,
                             std::string_view method) const;
};

/// (modified - baseline) / baseline * 100
double percentage_increase(double baseline, double modified);

using CellCallback = std::function<void(const ExperimentCell&)>;

/// Full cross product images x noise_grid x methods; metrics of the final
/// stage averaged over seeds. A failing cell is recorded and the run continues.
ExperimentTable run_experiment(const std::vector<NamedImage>& images,
                               const std::vector<NoiseSpec>& noise_grid,
                               const std::vector<Method>& methods,
                               const std::vector<std::uint64_t>& seeds,
                               const CellCallback& on_cell = {});

struct ExperimentPlan {
  std::vector<NamedImage> images;
  std::vector<NoiseSpec> noise_grid;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
};

/// Reads the flat key = value experiment file format (see README).
/// Relative image paths resolve against base_dir.
ExperimentPlan parse_experiment_config(std::string_view text,
                                       const std::filesystem::path& base_dir);

}  // namespace vstep
