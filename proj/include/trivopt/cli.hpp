#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trivopt/errors.hpp"

namespace trivopt::cli {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kDiverged = 2, kConfigError = 64 };

// Invalid configuration; the message names the offending key or value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class LrMode { Auto, Fixed, Curvature };

struct RunConfig {
  std::string command = "bench";  // bench | verify | expm-bench

  // bench
  std::string problem = "procrustes";
  std::size_t n = 4;
  std::size_t k = 2;
  std::string opt = "gd";
  LrMode lr_mode = LrMode::Auto;  // auto: 1/α from the problem (3e-4 for copy)
  double lr = 0.0;
  double alpha = 0.0;   // curvature mode: ambient Hessian bound, 0 takes the problem's
  double radius = 1.0;  // curvature mode: R
  double beta = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::string rule = "always";
  std::uint64_t k_every = 0;
  double eps_low = 0.1;
  double eps_high = 10.0;
  std::uint64_t iters = 100;
  double tol = 0.0;  // stop once ‖raw grad‖ < tol (0 disables)
  std::uint64_t seed = 0;
  std::string out;   // empty: stdout
  bool timing = true;  // false writes wall_ms = 0 so traces are byte-reproducible

  // copy task
  int alphabet = 9;
  int seq_len = 10;
  int spacing = 100;
  std::size_t batch = 64;
  double orth_ratio = 7.0;

  // verify
  std::vector<std::string> only;
  double tol_scale = 1.0;
  unsigned threads = 0;

  // expm-bench
  std::vector<std::size_t> sizes{4, 16, 64, 128};
  std::size_t count = 50;
};

// Every key accepted in a config file (flags use the same names with "--").
const std::vector<std::string>& known_keys();

// Parses `key = value` lines; '#' starts a comment. Keys may use '-' or '_'.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Builds a validated config from an already merged key/value map.
RunConfig config_from_map(const std::map<std::string, std::string>& values);

// Full command line (without argv[0]): optional leading command, flags, and
// --config FILE whose values flags override. Throws ConfigError.
RunConfig parse_config(const std::vector<std::string>& args);

// key = value dump of the effective configuration.
std::string describe(const RunConfig& cfg);

int run_bench(const RunConfig& cfg, std::ostream& diagnostics);
int run_verify(const RunConfig& cfg, std::ostream& diagnostics);
int run_expm_bench(const RunConfig& cfg, std::ostream& diagnostics);

// Parses and dispatches; returns the process exit code.
int main_entry(const std::vector<std::string>& args, std::ostream& diagnostics);

}  // namespace trivopt::cli
