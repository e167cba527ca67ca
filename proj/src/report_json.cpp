#include "vstep/report_json.hpp"

#include <cmath>

namespace vstep {

Json psnr_json(double psnr_db) {
  if (std::isinf(psnr_db)) return "inf";
  return psnr_db;
}

Json metric_block(const StageMetrics& m) {
  return Json{{"psnr_db", psnr_json(m.psnr_db)},
              {"ssim", m.ssim},
              {"tail_mass_3sigma", m.residual.tail_mass_3sigma},
              {"excess_kurtosis", m.residual.excess_kurtosis}};
}

Json residual_json(const ResidualStats& stats) {
  return Json{{"sample_count", stats.sample_count},
              {"mean", stats.mean},
              {"sigma_hat", stats.sigma_hat},
              {"tail_mass_3sigma", stats.tail_mass_3sigma},
              {"excess_kurtosis", stats.excess_kurtosis},
              {"bins", stats.counts.size()},
              {"range", {stats.bin_edges.front(), stats.bin_edges.back()}}};
}

Json config_json(const PipelineConfig& cfg) {
  Json j;
  j["rof"] = {{"kind", cfg.rof.name()}, {"max_window", cfg.rof.max_window}};
  if (cfg.variational) {
    const auto& v = *cfg.variational;
    j["vstep"] = {{"beta", v.beta},           {"eta", v.eta},
                  {"outer_tol", v.outer_tol}, {"max_outer", v.max_outer},
                  {"inner_tol", v.inner_tol}, {"max_inner", v.max_inner}};
  } else {
    j["vstep"] = nullptr;
  }
  Json s{{"kind", cfg.smoother.name()}};
  if (cfg.smoother.variant == SmootherKind::Variant::ReferenceTV) {
    s["lambda"] = cfg.smoother.lambda;
    s["eta"] = cfg.smoother.inner.eta;
  } else if (cfg.smoother.variant == SmootherKind::Variant::External) {
    s["command"] = cfg.smoother.command;
  }
  j["smoother"] = s;
  j["quantize_metrics"] = cfg.quantize_metrics;
  j["residual_bins"] = cfg.residual_bins;
  return j;
}

Json trace_json(const VstepResult& result) {
  Json rows = Json::array();
  for (const auto& rec : result.trace) {
    rows.push_back({{"iter", rec.iteration},
                    {"objective", rec.objective},
                    {"rel_change", rec.rel_change},
                    {"inner_iters", rec.inner_iterations}});
  }
  return Json{{"converged", result.converged},
              {"outer_iterations", result.outer_iterations()},
              {"warnings", result.warnings},
              {"trace", rows}};
}

Json report_json(const DenoiseReport& report, bool include_timing) {
  Json j;
  j["seed"] = report.seed ? Json(*report.seed) : Json(nullptr);
  j["config"] = config_json(report.config);
  j["impulse_candidates"] = report.candidate_count;
  Json stages = Json::array();
  for (const auto& s : report.stages) {
    Json st{{"name", s.name}};
    if (include_timing) st["seconds"] = s.seconds;
    if (s.metrics) {
      st["metrics"] = metric_block(*s.metrics);
      st["residual"] = residual_json(s.metrics->residual);
    }
    stages.push_back(std::move(st));
  }
  j["stages"] = stages;
  j["vstep"] = report.vstep ? trace_json(*report.vstep) : Json(nullptr);
  j["smoother"] = report.smoother ? trace_json(*report.smoother) : Json(nullptr);
  return j;
}

}  // namespace vstep
