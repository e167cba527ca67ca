#include "vstep/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "vstep/errors.hpp"
#include "vstep/ini.hpp"
#include "vstep/pgm.hpp"

namespace vstep {
namespace {

std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

bool same_noise(const NoiseSpec& a, const NoiseSpec& b) {
  return a.sigma == b.sigma && a.p == b.p && a.r == b.r && a.d_min == b.d_min &&
         a.d_max == b.d_max && a.clamp_gaussian == b.clamp_gaussian;
}

// ---- config parsing helpers -------------------------------------------------

std::string context(const IniSection& s, std::string_view key) {
  std::string where = "[" + s.kind + (s.name.empty() ? "" : " " + s.name) + "] (line " +
                      std::to_string(s.line) + ")";
  return where + " key '" + std::string(key) + "'";
}

double to_double(const IniSection& s, std::string_view key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ValidationError(context(s, key) + ": expected a number, got '" + value + "'");
  }
  return out;
}

long long to_integer(const IniSection& s, std::string_view key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(context(s, key) + ": expected an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const IniSection& s, std::string_view key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "on" || value == "1") return true;
  if (value == "false" || value == "no" || value == "off" || value == "0") return false;
  throw ValidationError(context(s, key) + ": expected true or false, got '" + value + "'");
}

std::vector<std::uint64_t> to_seed_list(const IniSection& s, const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const long long v = to_integer(s, "seeds", token);
    if (v < 0) throw ValidationError(context(s, "seeds") + ": seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
    token.clear();
  };
  for (char ch : value) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      flush();
    } else {
      token += ch;
    }
  }
  flush();
  if (seeds.empty()) throw ValidationError(context(s, "seeds") + ": empty seed list");
  return seeds;
}

void reject_unknown(const IniSection& s, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : s.entries) {
    if (!allowed.count(key)) throw ValidationError(context(s, key) + ": unknown key");
  }
}

Method parse_method(const IniSection& s, int default_window, bool quantize) {
  reject_unknown(s, {"rof", "amf_window", "vstep", "beta", "eta", "tol", "max_outer",
                     "inner_tol", "max_inner", "smoother", "lambda", "command", "baseline",
                     "quantize_metrics"});
  if (s.name.empty()) throw ValidationError("[method] section on line " + std::to_string(s.line) +
                                            " needs a name");
  Method m;
  m.name = s.name;
  m.config.quantize_metrics = quantize;
  int window = default_window;
  if (auto v = s.get("amf_window")) window = static_cast<int>(to_integer(s, "amf_window", *v));
  m.config.rof.max_window = window;
  if (auto v = s.get("rof"); v && *v != "auto") {
    try {
      m.config.rof = RofKind::parse(*v, window);
    } catch (const ValidationError& e) {
      throw ValidationError(context(s, "rof") + ": " + e.what());
    }
    m.auto_rof = false;
  }
  const bool enabled = s.get("vstep") ? to_bool(s, "vstep", *s.get("vstep")) : true;
  if (enabled) {
    VariationalConfig vc;
    if (auto v = s.get("beta"); v && *v != "auto") {
      vc.beta = to_double(s, "beta", *v);
      m.auto_beta = false;
    }
    if (auto v = s.get("eta")) vc.eta = to_double(s, "eta", *v);
    if (auto v = s.get("tol")) vc.outer_tol = to_double(s, "tol", *v);
    if (auto v = s.get("max_outer")) vc.max_outer = static_cast<int>(to_integer(s, "max_outer", *v));
    if (auto v = s.get("inner_tol")) vc.inner_tol = to_double(s, "inner_tol", *v);
    if (auto v = s.get("max_inner")) vc.max_inner = static_cast<int>(to_integer(s, "max_inner", *v));
    m.config.variational = vc;
  } else {
    m.config.variational.reset();
  }
  const std::string smoother = s.get("smoother").value_or("none");
  if (smoother == "none") {
    m.config.smoother.variant = SmootherKind::Variant::None;
  } else if (smoother == "reftv") {
    m.config.smoother.variant = SmootherKind::Variant::ReferenceTV;
    if (auto v = s.get("lambda")) m.config.smoother.lambda = to_double(s, "lambda", *v);
  } else if (smoother == "external") {
    m.config.smoother.variant = SmootherKind::Variant::External;
    m.config.smoother.command = s.get("command").value_or("");
  } else {
    throw ValidationError(context(s, "smoother") + ": expected none, reftv or external");
  }
  if (auto v = s.get("quantize_metrics")) {
    m.config.quantize_metrics = to_bool(s, "quantize_metrics", *v);
  }
  m.baseline = s.get("baseline").value_or("");
  try {
    m.config.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("[method " + m.name + "]: " + e.what());
  }
  return m;
}

}  // namespace

PipelineConfig Method::resolve(const NoiseSpec& spec) const {
  PipelineConfig cfg = config;
  if (auto_rof) cfg.rof = default_rof(spec, config.rof.max_window);
  if (auto_beta && cfg.variational) cfg.variational->beta = default_beta(spec);
  return cfg;
}

double percentage_increase(double baseline, double modified) {
  return (modified - baseline) / baseline * 100.0;
}

const ExperimentCell* ExperimentTable::find(std::string_view image, const NoiseSpec& noise,
                                            std::string_view method) const {
  for (const auto& row : rows) {
    if (row.image == image && row.method == method && same_noise(row.noise, noise)) return &row;
  }
  return nullptr;
}

std::string ExperimentTable::csv() const {
  std::string out =
      "image,sigma,p,r,method,seed_count,psnr_mean,ssim_mean,pct_increase_psnr,pct_increase_ssim\n";
  for (const auto& row : rows) {
    const bool ok = row.error.empty();
    out += row.image + ',' + format_number(row.noise.sigma, 4) + ',' +
           format_number(row.noise.p, 4) + ',' + format_number(row.noise.r, 4) + ',' + row.method +
           ',' + std::to_string(row.seed_count) + ',' +
           (ok ? format_number(row.psnr_mean, 4) : "") + ',' +
           (ok ? format_number(row.ssim_mean, 6) : "") + ',' +
           (row.pct_increase_psnr ? format_number(*row.pct_increase_psnr, 4) : "") + ',' +
           (row.pct_increase_ssim ? format_number(*row.pct_increase_ssim, 4) : "") + '\n';
  }
  return out;
}

std::string ExperimentTable::json() const {
  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["image"] = row.image;
    j["sigma"] = row.noise.sigma;
    j["p"] = row.noise.p;
    j["r"] = row.noise.r;
    j["method"] = row.method;
    j["seed_count"] = row.seed_count;
    if (row.error.empty()) {
      j["psnr_mean"] = row.psnr_mean;
      j["ssim_mean"] = row.ssim_mean;
      j["psnr_per_seed"] = row.psnr_per_seed;
      j["ssim_per_seed"] = row.ssim_per_seed;
    } else {
      j["error"] = row.error;
    }
    j["pct_increase_psnr"] = row.pct_increase_psnr ? nlohmann::ordered_json(*row.pct_increase_psnr)
                                                   : nlohmann::ordered_json(nullptr);
    j["pct_increase_ssim"] = row.pct_increase_ssim ? nlohmann::ordered_json(*row.pct_increase_ssim)
                                                   : nlohmann::ordered_json(nullptr);
    rows_json.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"rows", rows_json}}.dump(2) + "\n";
}

ExperimentTable run_experiment(const std::vector<NamedImage>& images,
                               const std::vector<NoiseSpec>& noise_grid,
                               const std::vector<Method>& methods,
                               const std::vector<std::uint64_t>& seeds,
                               const CellCallback& on_cell) {
  if (images.empty() || noise_grid.empty() || methods.empty() || seeds.empty()) {
    throw ValidationError("experiment needs at least one image, noise spec, method and seed");
  }
  ExperimentTable table;
  for (const auto& image : images) {
    for (const auto& noise : noise_grid) {
      noise.validate();
      std::vector<ImageGrid> noisy;
      noisy.reserve(seeds.size());
      for (auto seed : seeds) noisy.push_back(corrupt_mixed(image.image, noise, Seed{seed}));

      const std::size_t first = table.rows.size();
      for (const auto& method : methods) {
        ExperimentCell cell;
        cell.image = image.name;
        cell.noise = noise;
        cell.method = method.name;
        cell.seed_count = seeds.size();
        try {
          const PipelineConfig cfg = method.resolve(noise);
          for (std::size_t k = 0; k < seeds.size(); ++k) {
            const auto report = denoise(noisy[k], image.image, cfg, seeds[k]);
            const auto& m = *report.stage("final").metrics;
            cell.psnr_per_seed.push_back(m.psnr_db);
            cell.ssim_per_seed.push_back(m.ssim);
          }
          double ps = 0.0;
          double ss = 0.0;
          for (double v : cell.psnr_per_seed) ps += v;
          for (double v : cell.ssim_per_seed) ss += v;
          cell.psnr_mean = ps / static_cast<double>(seeds.size());
          cell.ssim_mean = ss / static_cast<double>(seeds.size());
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        table.rows.push_back(std::move(cell));
      }

      for (std::size_t i = first; i < table.rows.size(); ++i) {
        auto& cell = table.rows[i];
        const auto& method = methods[i - first];
        if (method.baseline.empty() || !cell.error.empty()) continue;
        for (std::size_t j = first; j < table.rows.size(); ++j) {
          const auto& base = table.rows[j];
          if (base.method != method.baseline || !base.error.empty()) continue;
          cell.pct_increase_psnr = percentage_increase(base.psnr_mean, cell.psnr_mean);
          cell.pct_increase_ssim = percentage_increase(base.ssim_mean, cell.ssim_mean);
        }
      }
      if (on_cell) {
        for (std::size_t i = first; i < table.rows.size(); ++i) on_cell(table.rows[i]);
      }
    }
  }
  return table;
}

ExperimentPlan parse_experiment_config(std::string_view text,
                                       const std::filesystem::path& base_dir) {
  const auto sections = parse_ini(text);
  ExperimentPlan plan;
  int window = kDefaultAmfWindow;
  bool quantize = false;
  std::optional<std::vector<std::uint64_t>> seeds;
  int repeats = 5;

  for (const auto& s : sections) {
    if (s.kind != "experiment") continue;
    reject_unknown(s, {"seeds", "repeats", "amf_window", "quantize_metrics"});
    if (auto v = s.get("seeds")) seeds = to_seed_list(s, *v);
    if (auto v = s.get("repeats")) {
      repeats = static_cast<int>(to_integer(s, "repeats", *v));
      if (repeats < 1) throw ValidationError(context(s, "repeats") + ": must be >= 1");
    }
    if (auto v = s.get("amf_window")) window = static_cast<int>(to_integer(s, "amf_window", *v));
    if (auto v = s.get("quantize_metrics")) quantize = to_bool(s, "quantize_metrics", *v);
  }
  if (seeds) {
    plan.seeds = *seeds;
  } else {
    for (int k = 1; k <= repeats; ++k) plan.seeds.push_back(static_cast<std::uint64_t>(k));
  }

  std::set<std::string> image_names;
  std::set<std::string> method_names;
  for (const auto& s : sections) {
    if (s.kind == "experiment") continue;
    if (s.kind == "image") {
      reject_unknown(s, {"path"});
      if (s.name.empty()) throw ValidationError("[image] on line " + std::to_string(s.line) + " needs a name");
      if (!image_names.insert(s.name).second) {
        throw ValidationError("duplicate image name '" + s.name + "'");
      }
      const auto path = s.get("path");
      if (!path) throw ValidationError(context(s, "path") + ": missing");
      std::filesystem::path p(*path);
      if (p.is_relative()) p = base_dir / p;
      plan.images.push_back({s.name, read_pgm_file(p)});
    } else if (s.kind == "noise") {
      reject_unknown(s, {"sigma", "p", "r", "clamp"});
      NoiseSpec spec;
      if (auto v = s.get("sigma")) spec.sigma = to_double(s, "sigma", *v);
      if (auto v = s.get("p")) spec.p = to_double(s, "p", *v);
      if (auto v = s.get("r")) spec.r = to_double(s, "r", *v);
      if (auto v = s.get("clamp")) spec.clamp_gaussian = to_bool(s, "clamp", *v);
      try {
        spec.validate();
      } catch (const ValidationError& e) {
        throw ValidationError("[noise] on line " + std::to_string(s.line) + ": " + e.what());
      }
      plan.noise_grid.push_back(spec);
    } else if (s.kind == "method") {
      Method m = parse_method(s, window, quantize);
      if (!method_names.insert(m.name).second) {
        throw ValidationError("duplicate method name '" + m.name + "'");
      }
      plan.methods.push_back(std::move(m));
    } else {
      throw ValidationError("unknown section [" + s.kind + "] on line " + std::to_string(s.line));
    }
  }
  for (const auto& m : plan.methods) {
    if (!m.baseline.empty() && !method_names.count(m.baseline)) {
      throw ValidationError("method '" + m.name + "' names unknown baseline '" + m.baseline + "'");
    }
  }
  if (plan.images.empty()) throw ValidationError("experiment config defines no [image]");
  if (plan.noise_grid.empty()) throw ValidationError("experiment config defines no [noise]");
  if (plan.methods.empty()) throw ValidationError("experiment config defines no [method]");
  return plan;
}

}  // namespace vstep
