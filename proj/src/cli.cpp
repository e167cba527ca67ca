#include "vstep/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vstep/errors.hpp"
#include "vstep/experiment.hpp"
#include "vstep/metrics.hpp"
#include "vstep/pgm.hpp"
#include "vstep/pipeline.hpp"
#include "vstep/report_json.hpp"

namespace vstep {
namespace {

void add_common(CLI::App* sub, RunConfig& cfg, const std::string& out_help) {
  sub->add_option("--seed", cfg.seed, "Seed for every random draw")->capture_default_str();
  sub->add_option("--out", cfg.out_path, out_help);
  sub->add_option("--format", cfg.format, "Standard output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

std::string csv_number(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

int cmd_corrupt(const RunConfig& cfg, std::ostream& out) {
  NoiseSpec spec = cfg.noise;
  spec.clamp_gaussian = !cfg.no_clamp;
  spec.validate();
  const ImageGrid clean = read_pgm_file(cfg.in_path);
  const ImageGrid noisy = corrupt_mixed(clean, spec, Seed{cfg.seed});
  write_pgm_file(cfg.out_path, noisy);
  // Metrics describe the written 8-bit observation.
  const ImageGrid stored = clamp_quantize(noisy, 0.0, 255.0);
  const double p = psnr(clean, stored);
  const double s = ssim(clean, stored);
  if (cfg.format == "csv") {
    out << "psnr_db,ssim\n" << csv_number(p) << ',' << csv_number(s) << '\n';
  } else {
    out << Json{{"psnr_db", psnr_json(p)}, {"ssim", s}}.dump(2) << '\n';
  }
  return kExitOk;
}

PipelineConfig pipeline_from(const RunConfig& cfg) {
  PipelineConfig pc;
  if (cfg.rof == "auto") {
    pc.rof.variant = cfg.rvin ? RofKind::Variant::AmfThenAcwmf : RofKind::Variant::Amf;
    pc.rof.max_window = cfg.amf_window;
  } else {
    pc.rof = RofKind::parse(cfg.rof, cfg.amf_window);
  }
  if (cfg.vstep) {
    VariationalConfig vc;
    vc.beta = cfg.beta > 0.0 ? cfg.beta : (cfg.rvin ? kBetaRandomValued : kBetaSaltPepper);
    vc.eta = cfg.eta;
    vc.outer_tol = cfg.tol;
    vc.max_outer = cfg.max_outer;
    vc.inner_tol = cfg.inner_tol;
    vc.max_inner = cfg.max_inner;
    pc.variational = vc;
  } else {
    pc.variational.reset();
  }
  const std::string smoother = cfg.no_smoother ? "none" : cfg.smoother;
  if (smoother == "reftv") {
    pc.smoother.variant = SmootherKind::Variant::ReferenceTV;
    if (cfg.lambda > 0.0) pc.smoother.lambda = cfg.lambda;
  } else if (smoother == "external") {
    pc.smoother.variant = SmootherKind::Variant::External;
    pc.smoother.command = cfg.smoother_cmd;
  } else {
    pc.smoother.variant = SmootherKind::Variant::None;
  }
  pc.quantize_metrics = cfg.quantize_metrics;
  pc.residual_bins = cfg.bins;
  pc.validate();
  return pc;
}

int cmd_denoise(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const PipelineConfig pc = pipeline_from(cfg);
  const ImageGrid noisy = read_pgm_file(cfg.in_path);
  std::optional<ImageGrid> clean;
  if (!cfg.clean_path.empty()) clean = read_pgm_file(cfg.clean_path);
  const DenoiseReport report = denoise(noisy, clean, pc, cfg.seed);

  write_pgm_file(cfg.out_path, report.final_image());
  if (!cfg.dump_stages.empty()) {
    std::filesystem::create_directories(cfg.dump_stages);
    for (const auto& s : report.stages) {
      write_pgm_file(std::filesystem::path(cfg.dump_stages) / (s.name + ".pgm"), s.image);
    }
  }
  if (!cfg.trace_path.empty()) {
    write_file_atomic(cfg.trace_path,
                      report.vstep ? trace_csv(report.vstep->trace) : trace_csv({}));
  }
  for (const auto& s : report.stages) err << "stage " << s.name << ": " << s.seconds << " s\n";
  if (cfg.format == "csv") {
    out << "stage," << (cfg.timing ? "seconds," : "")
        << "psnr_db,ssim,tail_mass_3sigma,excess_kurtosis\n";
    for (const auto& s : report.stages) {
      out << s.name;
      if (cfg.timing) out << ',' << csv_number(s.seconds);
      if (s.metrics) {
        out << ',' << csv_number(s.metrics->psnr_db) << ',' << csv_number(s.metrics->ssim) << ','
            << csv_number(s.metrics->residual.tail_mass_3sigma) << ','
            << csv_number(s.metrics->residual.excess_kurtosis);
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  } else {
    out << report_json(report, cfg.timing).dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_hist(const RunConfig& cfg, std::ostream& out) {
  if (cfg.bins < 3) throw ValidationError("--bins must be >= 3");
  const ImageGrid clean = read_pgm_file(cfg.in_path);
  const ImageGrid processed = read_pgm_file(cfg.processed_path);
  const ResidualStats stats = residual_stats(clean, processed, cfg.bins);
  if (!cfg.out_path.empty()) write_file_atomic(cfg.out_path, histogram_csv(stats));
  if (cfg.format == "csv") {
    out << histogram_csv(stats);
  } else {
    out << residual_json(stats).dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_experiment(const RunConfig& cfg, const CLI::App& sub, std::ostream& out,
                   std::ostream& err) {
  const auto bytes = read_file(cfg.config_path);
  const std::string text(bytes.begin(), bytes.end());
  ExperimentPlan plan =
      parse_experiment_config(text, std::filesystem::path(cfg.config_path).parent_path());
  if (sub.count("--seed") > 0) plan.seeds = {cfg.seed};

  const ExperimentTable table =
      run_experiment(plan.images, plan.noise_grid, plan.methods, plan.seeds,
                     [&err](const ExperimentCell& cell) {
                       err << "cell " << cell.image << " sigma=" << cell.noise.sigma
                           << " p=" << cell.noise.p << " r=" << cell.noise.r << " "
                           << cell.method << ": "
                           << (cell.error.empty() ? "psnr=" + csv_number(cell.psnr_mean) +
                                                        " ssim=" + csv_number(cell.ssim_mean)
                                                  : "error: " + cell.error)
                           << '\n';
                     });
  const std::string prefix = cfg.out_path.empty() ? "results" : cfg.out_path;
  write_file_atomic(prefix + ".csv", table.csv());
  write_file_atomic(prefix + ".json", table.json());
  out << (cfg.format == "csv" ? table.csv() : table.json());
  return kExitOk;
}

}  // namespace

std::shared_ptr<CLI::App> make_cli(RunConfig& cfg) {
  auto app = std::make_shared<CLI::App>(
      "Mixed Gaussian-impulse noise removal with a variational Gaussianization step", "vstep");
  app->require_subcommand(1);

  auto* corrupt = app->add_subcommand("corrupt", "Corrupt a clean PGM with mixed AWGN + impulse noise");
  corrupt->add_option("--in", cfg.in_path, "Clean input PGM")->required();
  add_common(corrupt, cfg, "Corrupted output PGM");
  corrupt->get_option("--out")->required();
  corrupt->add_option("--sigma", cfg.noise.sigma, "AWGN standard deviation (intensity units)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  corrupt->add_option("--p", cfg.noise.p, "Salt-and-pepper probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  corrupt->add_option("--r", cfg.noise.r, "Random-valued impulse probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  corrupt->add_flag("--no-clamp", cfg.no_clamp, "Do not clamp the Gaussian branch to [0, 255]");

  auto* dn = app->add_subcommand("denoise", "Run ROF -> variational step -> smoother");
  dn->add_option("--in", cfg.in_path, "Noisy input PGM")->required();
  add_common(dn, cfg, "Final output PGM");
  dn->get_option("--out")->required();
  dn->add_option("--clean", cfg.clean_path, "Clean reference PGM; enables metrics");
  dn->add_option("--rof", cfg.rof, "Rank-order filter")
      ->check(CLI::IsMember({"auto", "amf", "acwmf", "amf+acwmf"}))
      ->capture_default_str();
  dn->add_option("--amf-window", cfg.amf_window, "Largest AMF window (odd, >= 3)")
      ->capture_default_str();
  dn->add_flag("--rvin", cfg.rvin,
               "Input carries random-valued impulses: auto ROF becomes amf+acwmf, default beta 0.002");
  dn->add_flag("--vstep,!--no-vstep", cfg.vstep, "Enable or disable the variational step");
  dn->add_option("--beta", cfg.beta, "Regularization weight (default 0.0002, or 0.002 with --rvin)")
      ->check(CLI::PositiveNumber);
  dn->add_option("--eta", cfg.eta, "Smoothing parameter")->check(CLI::PositiveNumber)->capture_default_str();
  dn->add_option("--tol", cfg.tol, "Outer relative-change tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dn->add_option("--max-outer", cfg.max_outer, "Outer iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dn->add_option("--inner-tol", cfg.inner_tol, "CG relative residual tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dn->add_option("--max-inner", cfg.max_inner, "CG iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  dn->add_option("--smoother", cfg.smoother, "Final AWGN smoother")
      ->check(CLI::IsMember({"none", "reftv", "external"}))
      ->capture_default_str();
  dn->add_flag("--no-smoother", cfg.no_smoother, "Skip the smoother stage");
  dn->add_option("--lambda", cfg.lambda, "Reference smoother weight")->check(CLI::PositiveNumber);
  dn->add_option("--smoother-cmd", cfg.smoother_cmd,
                 "External smoother command with {in} and {out} placeholders");
  dn->add_option("--dump-stages", cfg.dump_stages, "Directory for per-stage PGMs");
  dn->add_option("--trace", cfg.trace_path, "Write the variational iteration trace as CSV");
  dn->add_flag("--quantize-metrics", cfg.quantize_metrics, "Quantize to 8 bits before metrics");
  dn->add_option("--bins", cfg.bins, "Residual histogram bins")->capture_default_str();
  dn->add_flag("--timing", cfg.timing, "Include per-stage wall-clock seconds in the report");

  auto* hist = app->add_subcommand("hist", "Residual histogram and heavy-tail statistics");
  hist->add_option("--clean", cfg.in_path, "Clean reference PGM")->required();
  hist->add_option("--processed", cfg.processed_path, "Processed PGM")->required();
  hist->add_option("--bins", cfg.bins, "Histogram bins (>= 3)")->capture_default_str();
  add_common(hist, cfg, "Histogram CSV (bin_center,count,log10_count)");

  auto* ex = app->add_subcommand("experiment", "Run an experiment grid from a config file");
  ex->add_option("--config", cfg.config_path, "Experiment config file")->required();
  add_common(ex, cfg, "Output prefix; writes PREFIX.csv and PREFIX.json (default results)");

  return app;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  auto app = make_cli(cfg);
  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  CLI::App* sub = app->get_subcommands().front();
  cfg.command = sub->get_name();
  try {
    if (cfg.command == "corrupt") return cmd_corrupt(cfg, out);
    if (cfg.command == "denoise") return cmd_denoise(cfg, out, err);
    if (cfg.command == "hist") return cmd_hist(cfg, out);
    return cmd_experiment(cfg, *sub, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ExternalCommandError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"vstep"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vstep
