#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/report.hpp"

namespace {

using rsb::cli::ConfigError;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  // Shorthands for --set; an empty value means "not given".
  std::string seed, output, csv, preset, check, t, r, replicas, t_grid;
};

int execute(const std::string& command, const Flags& flags) {
  rsb::cli::Settings settings;
  if (!flags.config_file.empty()) {
    settings = rsb::cli::parse_settings(read_file(flags.config_file));
  }
  auto put = [&](const std::string& key, const std::string& value) {
    if (!value.empty()) settings[key] = value;
  };
  for (const auto& s : flags.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    const auto parsed = rsb::cli::parse_settings(s);
    for (const auto& [k, v] : parsed) settings[k] = v;
  }
  put("seed", flags.seed);
  put("output", flags.output);
  put("csv", flags.csv);
  put("preset", flags.preset);
  put("check", flags.check);
  put("t", flags.t);
  put("r", flags.r);
  put("replicas", flags.replicas);
  put("t_grid", flags.t_grid);
  settings["command"] = command;

  const auto config = rsb::cli::build_config(settings);
  rsb::cli::validate(config);

  auto progress = [](const rsb::cli::CriterionResult& res) {
    std::fprintf(stderr, "criterion %2d %s  %s (%.1f s)\n", res.id,
                 res.pass() ? "PASS" : "FAIL", res.title.c_str(), res.seconds);
  };
  const auto out = rsb::cli::run(config, progress);
  if (!config.csv.empty() && !out.series) {
    throw ConfigError("this command and check produce no CSV series");
  }

  const std::string json =
      rsb::cli::to_json(out.report, rsb::cli::utc_timestamp()).dump(2) + "\n";
  std::vector<rsb::cli::OutputFile> files;
  if (!config.output.empty()) files.push_back({config.output, json});
  if (!config.csv.empty()) files.push_back({config.csv, out.series->text()});
  rsb::cli::write_files_atomic(files);
  if (config.output.empty()) std::cout << json;
  return out.report.pass() ? rsb::cli::kExitPass : rsb::cli::kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade, Poisson-Dirichlet and RSB-bound verification tool"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"pd", "Poisson-Dirichlet checks: pair-sum, invariance, corollary"},
      {"cascade", "cascade checks: overlap, log-partition, tilted, tilted-restricted, "
                  "tilt-invariance, snapshot"},
      {"bound", "Guerra bound at given parameters (m_k = 1), or a q1 scan via q_grid"},
      {"optimize", "minimize the bound over RSB parameters of depth k"},
      {"sk-exact", "exact free energy by enumeration; check=bound compares to the bound"},
      {"interpolate", "interpolation checks: phi, derivative, overlap, error-term"},
      {"verify-all", "run the acceptance matrix (preset desk or smoke)"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", flags.config_file, "config file of key = value lines");
    sub->add_option("--set", flags.sets, "override one config key, key=value");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("-o,--output", flags.output, "JSON report path (default stdout)");
    sub->add_option("--csv", flags.csv, "CSV series path");
    sub->add_option("--preset", flags.preset, "verify-all preset: desk or smoke");
    sub->add_option("--check", flags.check, "command-specific check");
    sub->add_option("--t", flags.t, "interpolation time");
    sub->add_option("--r", flags.r, "overlap level");
    sub->add_option("--replicas", flags.replicas, "Monte Carlo replicas");
    sub->add_option("--t-grid", flags.t_grid, "t grid as a list, e.g. [0,0.5,1]");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rsb::cli::kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return execute(command, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const rsb::cli::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
  }
  return rsb::cli::kExitUsage;
}
