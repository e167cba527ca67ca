#pragma once

#include <json.hpp>

#include "vstep/metrics.hpp"
#include "vstep/pipeline.hpp"
#include "vstep/variational.hpp"

namespace vstep {

using Json = nlohmann::ordered_json;

/// PSNR as a number, or the string "inf" for identical images.
Json psnr_json(double psnr_db);

/// {psnr_db, ssim, tail_mass_3sigma, excess_kurtosis}
Json metric_block(const StageMetrics& m);

Json residual_json(const ResidualStats& stats);
Json config_json(const PipelineConfig& cfg);
Json trace_json(const VstepResult& result);

/// Full report. Wall-clock timings are included only when requested so that
/// serialized reports stay reproducible.
Json report_json(const DenoiseReport& report, bool include_timing = true);

}  // namespace vstep
