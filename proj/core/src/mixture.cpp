#include "rsb/mixture.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rsb {
namespace {

void check_unit_interval(double x, const char* what) {
  if (!(x >= -1.0 - 1e-12 && x <= 1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << what << ": argument " << x << " outside [-1, 1]";
    throw std::domain_error(msg.str());
  }
}

std::string join_sequence(std::span<const double> values, const char* name) {
  std::ostringstream out;
  out << name << " = (";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ", ";
    out << values[i];
  }
  out << ")";
  return out.str();
}

}  // namespace

MixtureFunction::MixtureFunction(std::vector<MixtureTerm> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("mixture: empty term list");
  std::vector<int> seen;
  for (const auto& t : terms_) {
    if (t.p == 0) {
      throw std::invalid_argument("mixture: constant term p = 0 not allowed");
    }
    if (t.p < 0) throw std::invalid_argument("mixture: negative power");
    if (t.p != 1 && t.p % 2 != 0) {
      throw std::invalid_argument(
          "mixture: power p = " + std::to_string(t.p) +
          " breaks convexity; only p = 1 and even p are allowed");
    }
    if (!(t.beta >= 0.0) || !std::isfinite(t.beta)) {
      throw std::invalid_argument("mixture: beta must be finite and >= 0");
    }
    if (std::find(seen.begin(), seen.end(), t.p) != seen.end()) {
      throw std::invalid_argument("mixture: repeated power p = " +
                                  std::to_string(t.p));
    }
    seen.push_back(t.p);
  }
}

MixtureFunction MixtureFunction::sk(double beta) {
  return MixtureFunction({{2, std::abs(beta) / std::sqrt(2.0)}});
}

double MixtureFunction::xi(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.beta * t.beta * std::pow(x, t.p);
  return s;
}

double MixtureFunction::xi_prime(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    s += t.beta * t.beta * t.p * (t.p == 1 ? 1.0 : std::pow(x, t.p - 1));
  }
  return s;
}

double MixtureFunction::xi_second(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    if (t.p < 2) continue;
    s += t.beta * t.beta * t.p * (t.p - 1) *
         (t.p == 2 ? 1.0 : std::pow(x, t.p - 2));
  }
  return s;
}

int MixtureFunction::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.p);
  return d;
}

bool MixtureFunction::degenerate() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const MixtureTerm& t) { return t.beta == 0.0; });
}

MixtureFunction make_mixture(std::vector<MixtureTerm> terms) {
  return MixtureFunction(std::move(terms));
}

double theta(const MixtureFunction& mix, double x) {
  check_unit_interval(x, "theta");
  return x * mix.xi_prime(x) - mix.xi(x);
}

double delta(const MixtureFunction& mix, double a, double b) {
  check_unit_interval(a, "delta");
  check_unit_interval(b, "delta");
  return mix.xi(a) - a * mix.xi_prime(b) + b * mix.xi_prime(b) - mix.xi(b);
}

RSBParams::RSBParams(std::vector<double> m, std::vector<double> q) {
  if (m.empty()) throw std::invalid_argument("rsb: k must be >= 1");
  if (m.size() != q.size()) {
    throw std::invalid_argument("rsb: m and q must both have k entries (got " +
                                std::to_string(m.size()) + " and " +
                                std::to_string(q.size()) + ")");
  }
  m_.reserve(m.size() + 1);
  m_.push_back(0.0);
  m_.insert(m_.end(), m.begin(), m.end());
  q_.reserve(q.size() + 2);
  q_.push_back(0.0);
  q_.insert(q_.end(), q.begin(), q.end());
  q_.push_back(1.0);

  for (std::size_t l = 1; l < m_.size(); ++l) {
    if (!std::isfinite(m_[l]) || !(m_[l] > m_[l - 1])) {
      throw std::invalid_argument(
          "rsb: m must satisfy 0 = m_0 < m_1 < ... < m_k; violated at m_" +
          std::to_string(l) + " in " + join_sequence(m, "m"));
    }
  }
  if (m_.back() > 1.0) {
    throw std::invalid_argument("rsb: m_k must be <= 1 in " +
                                join_sequence(m, "m"));
  }
  for (std::size_t l = 1; l < q_.size(); ++l) {
    if (!std::isfinite(q_[l]) || !(q_[l] > q_[l - 1])) {
      throw std::invalid_argument(
          "rsb: q must satisfy 0 = q_0 < q_1 < ... < q_k < q_{k+1} = 1; "
          "violated at q_" +
          std::to_string(l) + " in " + join_sequence(q, "q"));
    }
  }
}

std::vector<double> RSBParams::m_inner() const {
  return {m_.begin() + 1, m_.end()};
}

std::vector<double> RSBParams::q_inner() const {
  return {q_.begin() + 1, q_.end() - 1};
}

void RSBParams::require_simulable() const {
  if (!(m_.back() < 1.0)) {
    throw std::invalid_argument(
        "rsb: cascade simulation requires m_k < 1 (the Poisson process with "
        "m = 1 has an infinite sum)");
  }
}

OverlapValue overlap(unsigned config_a, unsigned config_b, int n_sites) {
  const int differ = std::popcount(config_a ^ config_b);
  return {1.0 - 2.0 * differ / static_cast<double>(n_sites)};
}

std::string format_mixture(const MixtureFunction& mix) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : mix.terms()) arr.push_back({t.p, t.beta});
  return arr.dump();
}

MixtureFunction parse_mixture(std::string_view value) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("mixture: cannot parse '" +
                                std::string(value) + "'");
  }
  if (!j.is_array()) {
    throw std::invalid_argument("mixture: expected [[p,beta],...]");
  }
  std::vector<MixtureTerm> terms;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
        !item[1].is_number()) {
      throw std::invalid_argument("mixture: each term must be [p, beta]");
    }
    terms.push_back({item[0].get<int>(), item[1].get<double>()});
  }
  return MixtureFunction(std::move(terms));
}

std::string format_sequence(std::span<const double> values) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : values) arr.push_back(v);
  return arr.dump();
}

std::vector<double> parse_sequence(std::string_view value) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("cannot parse sequence '" +
                                std::string(value) + "'");
  }
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw std::invalid_argument("expected a number list");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw std::invalid_argument("expected a number list");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string write_model_block(const ModelBlock& block) {
  std::ostringstream out;
  out << "mixture = " << format_mixture(block.mixture) << "\n";
  if (block.rsb) {
    out << "m = " << format_sequence(block.rsb->m_inner()) << "\n";
    out << "q = " << format_sequence(block.rsb->q_inner()) << "\n";
  }
  return out.str();
}

ModelBlock read_model_block(std::string_view text) {
  ModelBlock block;
  std::optional<std::vector<double>> m, q;
  bool have_mixture = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected 'key = value' in '" +
                                  line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "mixture") {
      block.mixture = parse_mixture(value);
      have_mixture = true;
    } else if (key == "m") {
      m = parse_sequence(value);
    } else if (key == "q") {
      q = parse_sequence(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!have_mixture) throw std::invalid_argument("config: missing mixture");
  if (m.has_value() != q.has_value()) {
    throw std::invalid_argument("config: m and q must be given together");
  }
  if (m) block.rsb.emplace(*m, *q);
  return block;
}

}  // namespace rsb
