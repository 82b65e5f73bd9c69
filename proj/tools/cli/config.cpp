#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rsb::cli {
namespace {

const std::vector<std::string>& key_order() {
  static const std::vector<std::string> keys = {
      "command", "preset",    "mixture",  "m",         "q",
      "n_sites", "branching", "n_max",    "replicas",  "quad_nodes",
      "t_grid",  "q_grid",    "t",        "r",         "k",
      "h",       "pd_m",      "check",    "statistic", "marks",
      "functional", "remainder", "seed",  "output",    "csv",
      "tolerance_multiplier"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) { return nlohmann::json(v).dump(); }

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
}

template <class T>
T to_integer(const std::string& key, const std::string& v) {
  T x{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_sequence(const std::string& key, const std::string& v) {
  try {
    return parse_sequence(v);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::vector<double> split_numbers(std::string_view text, char sep,
                                  const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, sep)) out.push_back(to_double(what, trim(item)));
  return out;
}

}  // namespace

Settings parse_settings(std::string_view text) {
  Settings out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto& keys = key_order();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "'");
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("key '" + key + "' given twice");
    }
  }
  return out;
}

RunConfig build_config(const Settings& settings, RunConfig base) {
  RunConfig c = std::move(base);
  const auto& keys = key_order();
  for (const auto& [key, value] : settings) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };

  if (auto v = get("command")) c.command = *v;
  if (auto v = get("preset")) c.preset = *v;
  if (auto v = get("mixture")) {
    try {
      c.mixture = parse_mixture(*v);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mixture: ") + e.what());
    }
  }
  const auto* m = get("m");
  const auto* q = get("q");
  if (m || q) {
    std::vector<double> mv, qv;
    if (m) {
      mv = to_sequence("m", *m);
    } else if (c.rsb) {
      mv = c.rsb->m_inner();
    } else {
      throw ConfigError("m and q must be given together");
    }
    if (q) {
      qv = to_sequence("q", *q);
    } else if (c.rsb) {
      qv = c.rsb->q_inner();
    } else {
      throw ConfigError("m and q must be given together");
    }
    try {
      c.rsb.emplace(std::move(mv), std::move(qv));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("rsb parameters: ") + e.what());
    }
  }
  if (auto v = get("n_sites")) c.n_sites = to_integer<int>("n_sites", *v);
  if (auto v = get("branching")) c.branching = to_integer<int>("branching", *v);
  if (auto v = get("n_max")) c.n_max = to_integer<std::size_t>("n_max", *v);
  if (auto v = get("replicas")) c.replicas = to_integer<std::size_t>("replicas", *v);
  if (auto v = get("quad_nodes")) c.quad_nodes = to_integer<int>("quad_nodes", *v);
  if (auto v = get("t_grid")) c.t_grid = to_sequence("t_grid", *v);
  if (auto v = get("q_grid")) c.q_grid = to_sequence("q_grid", *v);
  if (auto v = get("t")) c.t = to_double("t", *v);
  if (auto v = get("r")) c.r = to_integer<int>("r", *v);
  if (auto v = get("k")) c.k = to_integer<int>("k", *v);
  if (auto v = get("h")) c.h = to_double("h", *v);
  if (auto v = get("pd_m")) c.pd_m = to_double("pd_m", *v);
  if (auto v = get("check")) c.check = *v;
  if (auto v = get("statistic")) c.statistic = *v;
  if (auto v = get("marks")) c.marks = *v;
  if (auto v = get("functional")) c.functional = *v;
  if (auto v = get("remainder")) c.remainder = to_bool("remainder", *v);
  if (auto v = get("seed")) c.seed = to_integer<std::uint64_t>("seed", *v);
  if (auto v = get("output")) c.output = *v;
  if (auto v = get("csv")) c.csv = *v;
  if (auto v = get("tolerance_multiplier")) {
    c.tolerance_multiplier = to_double("tolerance_multiplier", *v);
  }
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "command = " << c.command << "\n";
  out << "preset = " << c.preset << "\n";
  out << "mixture = " << format_mixture(c.mixture) << "\n";
  if (c.rsb) {
    out << "m = " << format_sequence(c.rsb->m_inner()) << "\n";
    out << "q = " << format_sequence(c.rsb->q_inner()) << "\n";
  }
  out << "n_sites = " << c.n_sites << "\n";
  out << "branching = " << c.branching << "\n";
  out << "n_max = " << c.n_max << "\n";
  out << "replicas = " << c.replicas << "\n";
  out << "quad_nodes = " << c.quad_nodes << "\n";
  out << "t_grid = " << format_sequence(c.t_grid) << "\n";
  out << "q_grid = " << format_sequence(c.q_grid) << "\n";
  out << "t = " << format_double(c.t) << "\n";
  out << "r = " << c.r << "\n";
  out << "k = " << c.k << "\n";
  out << "h = " << format_double(c.h) << "\n";
  out << "pd_m = " << format_double(c.pd_m) << "\n";
  out << "check = " << c.check << "\n";
  out << "statistic = " << c.statistic << "\n";
  out << "marks = " << c.marks << "\n";
  out << "functional = " << c.functional << "\n";
  out << "remainder = " << (c.remainder ? "true" : "false") << "\n";
  out << "seed = " << c.seed << "\n";
  out << "output = " << c.output << "\n";
  out << "csv = " << c.csv << "\n";
  out << "tolerance_multiplier = " << format_double(c.tolerance_multiplier) << "\n";
  return out.str();
}

RunConfig parse_config(std::string_view text) {
  // Absent m/q in serialized form means no RSB parameters, so start clean.
  return build_config(parse_settings(text), RunConfig{});
}

MarkSpec parse_marks(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("marks: expected 'family:parameters', got '" +
                      std::string(text) + "'");
  }
  const std::string family = trim(text.substr(0, colon));
  const std::string_view params = text.substr(colon + 1);
  try {
    if (family == "constant") {
      const auto v = split_numbers(params, ',', "marks");
      if (v.size() != 2) throw ConfigError("marks: constant takes x,y");
      return MarkSpec::constant(v[0], v[1]);
    }
    if (family == "log_normal") {
      const auto v = split_numbers(params, ',', "marks");
      if (v.size() != 2 && v.size() != 3) {
        throw ConfigError("marks: log_normal takes sigma,rho[,shift]");
      }
      return MarkSpec::log_normal(v[0], v[1], v.size() == 3 ? v[2] : 0.0);
    }
    if (family == "discrete") {
      std::vector<DiscreteAtom> atoms;
      std::string atom;
      std::istringstream in{std::string(params)};
      while (std::getline(in, atom, ';')) {
        const auto v = split_numbers(atom, ',', "marks");
        if (v.size() != 3) throw ConfigError("marks: discrete atoms are x,y,p");
        atoms.push_back({v[0], v[1], v[2]});
      }
      return MarkSpec::discrete(std::move(atoms));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("marks: ") + e.what());
  }
  throw ConfigError("marks: unknown family '" + family + "'");
}

const std::vector<std::string>& checks_for(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"pd", {"pair-sum", "invariance", "corollary"}},
      {"cascade",
       {"overlap", "log-partition", "tilted", "tilted-restricted",
        "tilt-invariance", "snapshot"}},
      {"bound", {"bound"}},
      {"optimize", {"optimize"}},
      {"sk-exact", {"free-energy", "bound"}},
      {"interpolate", {"phi", "derivative", "overlap", "error-term"}},
      {"verify-all", {"all"}},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::string effective_check(const RunConfig& c) {
  return c.check.empty() ? checks_for(c.command).front() : c.check;
}

void validate(const RunConfig& c) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end()) {
    throw ConfigError("unknown command '" + c.command + "'");
  }
  const auto& checks = checks_for(c.command);
  const std::string check = effective_check(c);
  if (std::find(checks.begin(), checks.end(), check) == checks.end()) {
    throw ConfigError("check '" + check + "' is not available for " + c.command);
  }
  if (c.preset != "desk" && c.preset != "smoke") {
    throw ConfigError("preset must be desk or smoke");
  }
  if (c.n_sites < 1) throw ConfigError("n_sites must be >= 1");
  if (c.branching < 2) throw ConfigError("branching must be >= 2");
  if (c.n_max < 10) throw ConfigError("n_max must be >= 10");
  if (c.replicas < 2) throw ConfigError("replicas must be >= 2");
  if (c.quad_nodes < 8) throw ConfigError("quad_nodes must be >= 8");
  if (!(c.t >= 0.0 && c.t <= 1.0)) throw ConfigError("t must lie in [0, 1]");
  for (double t : c.t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("t_grid values must lie in [0, 1]");
  }
  for (double q : c.q_grid) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q_grid values must lie in (0, 1)");
  }
  if (c.k < 1 || c.k > 3) throw ConfigError("k must lie in 1..3");
  if (c.r < 1) throw ConfigError("r must be >= 1");
  if (!(c.pd_m > 0.0 && c.pd_m < 1.0)) throw ConfigError("pd_m must lie in (0, 1)");
  if (!(c.tolerance_multiplier > 0.0)) {
    throw ConfigError("tolerance_multiplier must be positive");
  }
  parse_marks(c.marks);
  try {
    parse_pd_statistic(c.statistic);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("statistic: ") + e.what());
  }
  const std::vector<std::string> functionals = {"constant", "linear",
                                                "quadratic", "log_cosh"};
  if (std::find(functionals.begin(), functionals.end(), c.functional) ==
      functionals.end()) {
    throw ConfigError("functional must be one of constant, linear, quadratic, log_cosh");
  }

  const bool needs_rsb =
      c.command == "cascade" || c.command == "interpolate" ||
      (c.command == "bound" && c.q_grid.empty());
  if (needs_rsb && !c.rsb) throw ConfigError(c.command + " needs m and q");
  if (c.rsb && (c.command == "cascade" || c.command == "interpolate") &&
      c.rsb->m(c.rsb->k()) >= 1.0) {
    throw ConfigError("simulation needs m_k < 1");
  }
  if (c.command == "bound" && c.q_grid.empty() && !c.rsb->guerra_endpoint()) {
    throw ConfigError("bound needs m_k = 1");
  }
  if (c.rsb && (check == "tilted-restricted" || check == "error-term") &&
      c.r > c.rsb->k()) {
    throw ConfigError("r must lie in 1..k");
  }
}

}  // namespace rsb::cli
