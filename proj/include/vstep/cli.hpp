#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vstep/noise.hpp"

namespace CLI {
class App;
}

namespace vstep {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2, kExitNumerical = 3 };

/// Everything the command line can set, filled in by the parser.
struct RunConfig {
  std::string command;
  std::string format = "json";
  std::uint64_t seed = 1;
  std::string in_path;
  std::string out_path;
  // corrupt
  NoiseSpec noise;
  bool no_clamp = false;
  // denoise
  std::string clean_path;
  std::string rof = "auto";
  int amf_window = 39;
  bool rvin = false;
  bool vstep = true;
  double beta = 0.0;
  double eta = 1e-4;
  double tol = 1e-3;
  int max_outer = 100;
  double inner_tol = 1e-6;
  int max_inner = 500;
  std::string smoother = "reftv";
  bool no_smoother = false;
  double lambda = 0.0;
  std::string smoother_cmd;
  std::string dump_stages;
  std::string trace_path;
  bool quantize_metrics = false;
  bool timing = false;
  // hist
  std::string processed_path;
  std::size_t bins = 101;
  // experiment
  std::string config_path;
};

/// Builds the parser bound to cfg. Exposed so tests can reflect over the flags.
std::shared_ptr<CLI::App> make_cli(RunConfig& cfg);

/// Parses and executes one command. JSON/CSV goes to out, diagnostics to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vstep
