#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rsb/mixture.hpp"
#include "rsb/pd_process.hpp"

namespace rsb::cli {

/// Invalid or unknown configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "pd", "cascade", "bound", "optimize", "sk-exact", "interpolate",
      "verify-all"};
  return names;
}

/// Everything a run depends on. Fields irrelevant to the command are carried
/// but ignored, so one file can drive several subcommands.
struct RunConfig {
  std::string command = "verify-all";
  std::string preset = "desk";
  MixtureFunction mixture = MixtureFunction::sk(1.0);
  std::optional<RSBParams> rsb;
  int n_sites = 10;
  int branching = 200;
  std::size_t n_max = 2000;
  std::size_t replicas = 2000;
  int quad_nodes = 40;
  std::vector<double> t_grid;
  std::vector<double> q_grid;
  double t = 0.5;
  int r = 1;
  int k = 1;
  double h = 0.0;
  double pd_m = 0.5;
  /// Command-specific check; empty selects the command's default.
  std::string check;
  std::string statistic = "pair_sum";
  std::string marks = "log_normal:0.5,0.6";
  std::string functional = "linear";
  bool remainder = true;
  std::uint64_t seed = 1;
  std::string output;
  std::string csv;
  double tolerance_multiplier = 3.0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// key -> raw value text, as read from a file or a flag.
using Settings = std::map<std::string, std::string>;

/// Parses `key = value` lines ('#' starts a comment). Unknown or repeated
/// keys are rejected.
Settings parse_settings(std::string_view text);

/// Applies settings on top of `base`; m and q must come together unless the
/// base already has RSB parameters. Throws ConfigError.
RunConfig build_config(const Settings& settings, RunConfig base = {});

/// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);
RunConfig parse_config(std::string_view text);

/// Checks ranges and command-specific requirements. Throws ConfigError.
void validate(const RunConfig& config);

/// Mark families in config syntax:
///   constant:x,y   log_normal:sigma,rho[,shift]   discrete:x,y,p;x,y,p;...
MarkSpec parse_marks(std::string_view text);

/// Checks accepted by each command; the first is the default.
const std::vector<std::string>& checks_for(const std::string& command);
std::string effective_check(const RunConfig& config);

}  // namespace rsb::cli
