#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "vstep/errors.hpp"
#include "vstep/experiment.hpp"
#include "vstep/ini.hpp"
#include "vstep/pgm.hpp"
#include "vstep/pipeline.hpp"
#include "vstep/report_json.hpp"

using namespace vstep;
using vstep::testing::random_image;
using vstep::testing::synthetic_scene;

namespace fs = std::filesystem;

namespace {

NoiseSpec mixed(double sigma, double p, double r = 0.0) {
  NoiseSpec s;
  s.sigma = sigma;
  s.p = p;
  s.r = r;
  return s;
}

PipelineConfig plain_config() {
  PipelineConfig cfg;
  cfg.rof = RofKind::parse("amf", 15);
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("vstep_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gaussianize without the variational step returns the ROF output") {
  const auto clean = synthetic_scene(40, 40);
  const auto noisy = corrupt_mixed(clean, mixed(10, 0.3), Seed{1});
  auto cfg = plain_config();
  cfg.variational.reset();
  const auto g = gaussianize(noisy, cfg);
  CHECK(g.output == amf(noisy, 15));
  CHECK(g.output == g.rof_out);
  CHECK(g.mask == detect_impulses(noisy, g.rof_out));
  CHECK_FALSE(g.solve.has_value());
}

TEST_CASE("gaussianize on an impulse-free smooth image is nearly the identity") {
  ImageGrid smooth(32, 32);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) smooth(r, c) = 100.0 + 0.5 * r + 0.25 * c + 0.01 * r * c;
  }
  const auto g = gaussianize(smooth, plain_config());
  REQUIRE(g.solve.has_value());
  CHECK(g.solve->converged);
  double worst = 0.0;
  for (std::size_t i = 0; i < smooth.size(); ++i) {
    worst = std::max(worst, std::abs(g.output.pixels()[i] - smooth.pixels()[i]));
  }
  CHECK(worst < 1.0);
}

TEST_CASE("gaussianize thins the far residual tail on mixed noise") {
  const auto clean = synthetic_scene(96, 96);
  const auto noisy = corrupt_mixed(clean, mixed(25, 0.3), Seed{4});
  const auto g = gaussianize(noisy, plain_config());
  auto far_tail = [&](const ImageGrid& x) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) n += std::abs(x.pixels()[i] - clean.pixels()[i]) > 75.0;
    return n;
  };
  CHECK(far_tail(g.output) < far_tail(g.rof_out));
  CHECK(objective(g.output, noisy, g.mask, kBetaSaltPepper) <
        objective(g.rof_out, noisy, g.mask, kBetaSaltPepper));
}

TEST_CASE("reference_smoother limits") {
  const auto img = random_image(20, 20, 3, 50.0, 200.0);
  const auto res = reference_smoother(img, 1e-9);
  double worst = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    worst = std::max(worst, std::abs(res.image.pixels()[i] - img.pixels()[i]));
  }
  CHECK(worst < 0.01);

  const ImageGrid flat(16, 16, 73.0);
  for (double lambda : {0.01, 0.35, 5.0}) {
    const auto out = reference_smoother(flat, lambda).image;
    for (double v : out.pixels()) CHECK(v == doctest::Approx(73.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(reference_smoother(flat, 0.0), ValidationError);
}

TEST_CASE("reference_smoother improves AWGN-only input") {
  const auto clean = synthetic_scene(64, 64);
  const auto noisy = add_awgn(clean, 25.0, Seed{2});
  const auto out = reference_smoother(noisy, kDefaultReferenceLambda).image;
  CHECK(psnr(clean, out) > psnr(clean, noisy) + 3.0);
}

TEST_CASE("denoise with every stage disabled is the identity") {
  const auto clean = synthetic_scene(32, 32);
  const ImageGrid smooth(32, 32, 90.0);
  PipelineConfig cfg = plain_config();
  cfg.variational.reset();
  // A flat image passes AMF untouched, so the ROF stage is also a no-op.
  const auto report = denoise(smooth, clean, cfg);
  CHECK(report.final_image() == smooth);
  CHECK(report.stage("final").metrics->psnr_db == report.stage("noisy").metrics->psnr_db);
  CHECK(report.candidate_count == 0);
  CHECK_THROWS_AS(report.stage("bogus"), Error);
}

TEST_CASE("denoise report metrics are recomputable from stored images") {
  const auto clean = synthetic_scene(48, 48);
  const auto noisy = corrupt_mixed(clean, mixed(20, 0.3), Seed{5});
  PipelineConfig cfg = plain_config();
  cfg.smoother.variant = SmootherKind::Variant::ReferenceTV;
  const auto report = denoise(noisy, clean, cfg, 5);
  REQUIRE(report.stages.size() == 4);

  const auto j = Json::parse(report_json(report).dump());
  CHECK(j["seed"] == 5);
  for (std::size_t k = 0; k < report.stages.size(); ++k) {
    const auto& stage = report.stages[k];
    const auto& js = j["stages"][k];
    CHECK(js["name"] == stage.name);
    const double p = psnr(clean, stage.image);
    const double s = ssim(clean, stage.image);
    const auto rs = residual_stats(clean, stage.image, cfg.residual_bins);
    CHECK(std::abs(js["metrics"]["psnr_db"].get<double>() - p) <= 1e-9);
    CHECK(std::abs(js["metrics"]["ssim"].get<double>() - s) <= 1e-9);
    CHECK(std::abs(js["metrics"]["tail_mass_3sigma"].get<double>() - rs.tail_mass_3sigma) <= 1e-9);
    CHECK(std::abs(js["metrics"]["excess_kurtosis"].get<double>() - rs.excess_kurtosis) <= 1e-9);
  }
  CHECK(report.stage("noisy").image == noisy);
  CHECK(j["vstep"]["converged"].is_boolean());
}

TEST_CASE("infinite PSNR serialises as a string") {
  const auto img = synthetic_scene(16, 16);
  PipelineConfig cfg = plain_config();
  cfg.variational.reset();
  const auto j = report_json(denoise(img, img, cfg));
  CHECK(j["stages"][0]["metrics"]["psnr_db"] == "inf");
  CHECK(psnr_json(48.0) == 48.0);
}

TEST_CASE("denoise is deterministic and the vstep A/B shares upstream stages") {
  const auto clean = synthetic_scene(40, 40);
  const auto noisy = corrupt_mixed(clean, mixed(25, 0.5), Seed{9});
  PipelineConfig with = plain_config();
  with.smoother.variant = SmootherKind::Variant::ReferenceTV;
  PipelineConfig without = with;
  without.variational.reset();

  const auto a = denoise(noisy, clean, with, 9);
  const auto b = denoise(noisy, clean, with, 9);
  for (std::size_t k = 0; k < a.stages.size(); ++k) CHECK(a.stages[k].image == b.stages[k].image);
  CHECK(report_json(a, false).dump() == report_json(b, false).dump());

  const auto c = denoise(noisy, clean, without, 9);
  CHECK(c.stage("noisy").image == a.stage("noisy").image);
  CHECK(c.stage("rof_out").image == a.stage("rof_out").image);
  CHECK(c.stage("vstep_out").image == c.stage("rof_out").image);
}

TEST_CASE("quantized metrics round the stage first") {
  const auto clean = clamp_quantize(synthetic_scene(24, 24), 0.0, 255.0);
  auto img = clean;
  img(3, 3) += 0.3;
  PipelineConfig cfg = plain_config();
  CHECK(std::isfinite(stage_metrics(clean, img, cfg).psnr_db));
  cfg.quantize_metrics = true;
  CHECK(std::isinf(stage_metrics(clean, img, cfg).psnr_db));
}

TEST_CASE("external smoother") {
  const auto img = random_image(12, 12, 1);
  const auto copy = run_external_smoother(img, "cp {in} {out}");
  CHECK(copy == clamp_quantize(img, 0.0, 255.0));

  try {
    run_external_smoother(img, "echo failing-tool-message >&2; exit 3; : {in} {out}");
    FAIL("expected ExternalCommandError");
  } catch (const ExternalCommandError& e) {
    CHECK(e.output().find("failing-tool-message") != std::string::npos);
  }
  CHECK_THROWS_AS(run_external_smoother(img, "true {in}"), ValidationError);
  CHECK_THROWS_AS(run_external_smoother(img, "true {in} {out}"), ExternalCommandError);

  PipelineConfig cfg = plain_config();
  cfg.variational.reset();
  cfg.smoother.variant = SmootherKind::Variant::External;
  cfg.smoother.command = "cp {in} {out}";
  const auto rep = denoise(img, std::nullopt, cfg);
  CHECK(rep.final_image() == clamp_quantize(rep.stage("vstep_out").image, 0.0, 255.0));
  CHECK_FALSE(rep.stage("final").metrics.has_value());
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  cfg.repeat_count = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.smoother.variant = SmootherKind::Variant::ReferenceTV;
  cfg.smoother.lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.residual_bins = 2;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  CHECK(default_beta(mixed(25, 0.3)) == kBetaSaltPepper);
  CHECK(default_beta(mixed(10, 0.25, 0.05)) == kBetaRandomValued);
  CHECK(default_rof(mixed(25, 0.3)).variant == RofKind::Variant::Amf);
  CHECK(default_rof(mixed(10, 0.25, 0.05)).variant == RofKind::Variant::AmfThenAcwmf);
}

TEST_CASE("run_experiment single cell equals denoise") {
  const auto clean = synthetic_scene(40, 40);
  Method m;
  m.name = "amf";
  m.config.variational.reset();
  m.config.rof.max_window = 15;
  const auto spec = mixed(15, 0.3);
  const auto table = run_experiment({{"scene", clean}}, {spec}, {m}, {7});
  REQUIRE(table.rows.size() == 1);
  const auto& row = table.rows[0];
  CHECK(row.error.empty());
  CHECK(row.seed_count == 1);

  const auto noisy = corrupt_mixed(clean, spec, Seed{7});
  const auto report = denoise(noisy, clean, m.resolve(spec), 7);
  CHECK(row.psnr_mean == report.stage("final").metrics->psnr_db);
  CHECK(row.ssim_mean == report.stage("final").metrics->ssim);
}

TEST_CASE("run_experiment cross product, baselines and failures") {
  const auto a = synthetic_scene(32, 32);
  const auto b = random_image(32, 32, 4, 30.0, 220.0);
  Method base;
  base.name = "base";
  base.config.variational.reset();
  base.config.rof.max_window = 9;
  Method self = base;
  self.name = "self";
  self.baseline = "base";
  Method broken = base;
  broken.name = "broken";
  broken.config.smoother.variant = SmootherKind::Variant::External;
  broken.config.smoother.command = "false {in} {out}";

  std::size_t callbacks = 0;
  const auto table = run_experiment({{"a", a}, {"b", b}}, {mixed(10, 0.3), mixed(10, 0.5)},
                                    {base, self, broken}, {1, 2},
                                    [&](const ExperimentCell&) { ++callbacks; });
  CHECK(table.rows.size() == 12);
  CHECK(callbacks == 12);
  for (const auto& row : table.rows) {
    if (row.method == "self") {
      REQUIRE(row.pct_increase_psnr.has_value());
      CHECK(*row.pct_increase_psnr == 0.0);
      CHECK(*row.pct_increase_ssim == 0.0);
    } else if (row.method == "broken") {
      CHECK_FALSE(row.error.empty());
    } else {
      CHECK_FALSE(row.pct_increase_psnr.has_value());
    }
  }
  const auto csv = table.csv();
  CHECK(csv.rfind("image,sigma,p,r,method,seed_count,psnr_mean,ssim_mean,pct_increase_psnr,"
                  "pct_increase_ssim\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  const auto j = Json::parse(table.json());
  CHECK(j["rows"].size() == 12);
  CHECK(table.find("b", mixed(10, 0.5), "self") != nullptr);
  CHECK(table.find("c", mixed(10, 0.5), "self") == nullptr);

  CHECK(percentage_increase(20.0, 25.0) == doctest::Approx(25.0));
  CHECK_THROWS_AS(run_experiment({}, {mixed(10, 0.3)}, {base}, {1}), ValidationError);
}

TEST_CASE("parse_ini") {
  const auto sections = parse_ini("# comment\n[method fast]\nrof = amf ; trailing\n\n[noise]\nsigma=25\n");
  REQUIRE(sections.size() == 2);
  CHECK(sections[0].kind == "method");
  CHECK(sections[0].name == "fast");
  CHECK(sections[0].get("rof") == "amf");
  CHECK(sections[1].kind == "noise");
  CHECK(sections[1].name.empty());
  CHECK(sections[1].get("sigma") == "25");
  CHECK_FALSE(sections[1].get("p").has_value());

  CHECK_THROWS_AS(parse_ini("key = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_ini("[noise]\njunk line\n"), ParseError);
  CHECK_THROWS_AS(parse_ini("[noise]\np = 1\np = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_ini("[noise\n"), ParseError);
}

TEST_CASE("parse_experiment_config") {
  const auto dir = scratch_dir("cfg");
  write_pgm_file(dir / "scene.pgm", synthetic_scene(24, 24));
  const std::string good = R"(
[experiment]
seeds = 3, 4
amf_window = 21

[image scene]
path = scene.pgm

[noise]
sigma = 25
p = 0.3

[noise]
sigma = 10
p = 0.25
r = 0.05

[method plain]
vstep = false
smoother = reftv
lambda = 0.4

[method full]
smoother = reftv
baseline = plain
)";
  const auto plan = parse_experiment_config(good, dir);
  CHECK(plan.seeds == std::vector<std::uint64_t>{3, 4});
  REQUIRE(plan.images.size() == 1);
  CHECK(plan.images[0].image == clamp_quantize(synthetic_scene(24, 24), 0.0, 255.0));
  CHECK(plan.noise_grid.size() == 2);
  REQUIRE(plan.methods.size() == 2);
  CHECK_FALSE(plan.methods[0].config.variational.has_value());
  CHECK(plan.methods[0].config.smoother.lambda == 0.4);
  CHECK(plan.methods[1].baseline == "plain");
  const auto rvin = plan.methods[1].resolve(plan.noise_grid[1]);
  CHECK(rvin.variational->beta == kBetaRandomValued);
  CHECK(rvin.rof.variant == RofKind::Variant::AmfThenAcwmf);
  CHECK(rvin.rof.max_window == 21);
  CHECK(plan.methods[1].resolve(plan.noise_grid[0]).variational->beta == kBetaSaltPepper);

  const std::string head = "[image scene]\npath = scene.pgm\n[noise]\nsigma = 5\n";
  CHECK_THROWS_WITH_AS(parse_experiment_config(head + "[method a]\n[method a]\n", dir),
                       doctest::Contains("duplicate method"), ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(head + "[method a]\ncolour = red\n", dir), ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(head + "[method a]\nbaseline = zzz\n", dir), ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(head + "[method a]\nbeta = fast\n", dir), ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(head, dir), ValidationError);
  CHECK_THROWS_AS(parse_experiment_config("[image x]\npath = missing.pgm\n", dir), IoError);
  CHECK_THROWS_AS(parse_experiment_config(head + "[method a]\n[noise]\np = 2\n", dir),
                  ValidationError);
}
