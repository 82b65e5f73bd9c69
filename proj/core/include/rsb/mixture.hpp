#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsb {

/// One term beta_p^2 x^p of the covariance function.
struct MixtureTerm {
  int p = 2;
  double beta = 1.0;
  friend bool operator==(const MixtureTerm&, const MixtureTerm&) = default;
};

/// Covariance function xi(x) = sum_p beta_p^2 x^p of a mixed p-spin model.
///
/// Only p = 1 and even p are accepted, which makes xi convex on [-1, 1];
/// p = 0 would be a constant term and is rejected so that xi(0) = 0 holds
/// exactly. beta_p = 0 is allowed and gives the degenerate model xi = 0.
class MixtureFunction {
 public:
  explicit MixtureFunction(std::vector<MixtureTerm> terms);

  /// Sherrington-Kirkpatrick model at inverse temperature beta:
  /// xi(x) = beta^2 x^2 / 2, i.e. the single term (2, beta / sqrt 2).
  static MixtureFunction sk(double beta);

  double xi(double x) const;
  double xi_prime(double x) const;
  double xi_second(double x) const;

  const std::vector<MixtureTerm>& terms() const { return terms_; }
  int max_degree() const;
  /// True when every beta_p is zero, so xi and all its derivatives vanish.
  bool degenerate() const;

  friend bool operator==(const MixtureFunction&,
                         const MixtureFunction&) = default;

 private:
  std::vector<MixtureTerm> terms_;
};

MixtureFunction make_mixture(std::vector<MixtureTerm> terms);

/// theta(x) = x xi'(x) - xi(x). Requires x in [-1, 1].
double theta(const MixtureFunction& mix, double x);

/// Delta(a, b) = xi(a) - a xi'(b) + theta(b) >= 0. Requires a, b in [-1, 1].
double delta(const MixtureFunction& mix, double a, double b);

/// Replica-symmetry-breaking parameters
///   0 = m_0 < m_1 < ... < m_k <= 1,   0 = q_0 < q_1 < ... < q_k < q_{k+1} = 1.
/// Both endpoints are stored so that m(0), q(0) and q(k+1) need no special
/// casing.
class RSBParams {
 public:
  /// `m` holds m_1..m_k and `q` holds q_1..q_k; both must have length k >= 1.
  /// Throws std::invalid_argument naming the violated ordering constraint.
  RSBParams(std::vector<double> m, std::vector<double> q);

  int k() const { return static_cast<int>(m_.size()) - 1; }
  /// m_l for l in [0, k].
  double m(int l) const { return m_.at(static_cast<std::size_t>(l)); }
  /// q_l for l in [0, k+1].
  double q(int l) const { return q_.at(static_cast<std::size_t>(l)); }

  std::span<const double> m_all() const { return m_; }
  std::span<const double> q_all() const { return q_; }
  /// m_1..m_k and q_1..q_k, the values a config block carries.
  std::vector<double> m_inner() const;
  std::vector<double> q_inner() const;

  /// m_k == 1, Guerra's endpoint.
  bool guerra_endpoint() const { return m_.back() == 1.0; }

  /// Cascade simulation needs m_k < 1; throws otherwise.
  void require_simulable() const;

  friend bool operator==(const RSBParams&, const RSBParams&) = default;

 private:
  std::vector<double> m_;
  std::vector<double> q_;
};

/// Overlap R_{1,2} = sigma^1 . sigma^2 / N of two configurations.
struct OverlapValue {
  double r12 = 0.0;
};

/// Configurations are encoded as bit masks: bit i set means sigma_i = -1.
OverlapValue overlap(unsigned config_a, unsigned config_b, int n_sites);

// Plain-text config block, one `key = value` per line:
//
//   mixture = [[2,1.0],[4,0.5]]
//   m = [0.4,0.8]
//   q = [0.3,0.6]
//
// q_0 = 0 and q_{k+1} = 1 are implicit; m_0 = 0 likewise.

std::string format_mixture(const MixtureFunction& mix);
MixtureFunction parse_mixture(std::string_view value);
std::string format_sequence(std::span<const double> values);
std::vector<double> parse_sequence(std::string_view value);

struct ModelBlock {
  MixtureFunction mixture{std::vector<MixtureTerm>{{2, 1.0}}};
  std::optional<RSBParams> rsb;
  friend bool operator==(const ModelBlock&, const ModelBlock&) = default;
};

std::string write_model_block(const ModelBlock& block);
/// Accepts exactly the keys mixture, m, q (m and q together or not at all).
ModelBlock read_model_block(std::string_view text);

}  // namespace rsb
