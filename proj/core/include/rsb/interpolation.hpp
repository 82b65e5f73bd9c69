#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rsb/cascade.hpp"
#include "rsb/estimate.hpp"
#include "rsb/mixture.hpp"
#include "rsb/recursion.hpp"
#include "rsb/sk_model.hpp"

namespace rsb {

// Joint Gibbs measure on configurations x cascade leaves,
//   Gamma(sigma, alpha) ~ w_alpha exp(sqrt(t) H_N(sigma)
//                          + sqrt(1-t) s^alpha . sigma + h sum_i sigma_i),
// enumerated exactly. A leaf remainder of the cascade enters as one extra
// row per leaf-level parent whose level-k field column is integrated out:
// its weight carries the factor exp((1-t) N v_k / 2).

struct SystemConfig {
  int n_sites = 4;
  MixtureFunction mixture = MixtureFunction::sk(0.5);
  RSBParams rsb{{0.4, 0.95}, {0.3, 0.7}};
  int branching = 50;
  double h = 0.0;
  CascadeOptions cascade;
};

/// Checks N <= 8, b^k <= 10^4 and 2^N b^k <= 2.5 * 10^6.
void validate_system(const SystemConfig& config);

class GibbsSystem {
 public:
  int n_sites() const { return n_; }
  double t() const { return t_; }
  const Cascade& cascade() const { return cascade_; }
  const HamiltonianTable& hamiltonian() const { return hamiltonian_; }

  /// log sum_{alpha, sigma} w_alpha exp H_t(sigma, alpha).
  double log_partition() const { return log_partition_; }

  std::size_t configs() const { return std::size_t{1} << n_; }
  /// Leaf rows first (b^k of them), then one row per remainder.
  std::size_t rows() const { return probabilities_.size() / configs(); }
  std::size_t leaf_rows() const { return cascade_.leaf_count(); }
  /// Gamma(row, sigma), row-major.
  std::span<const double> probabilities() const { return probabilities_; }
  double total_probability() const;

  /// For r = 1..k+1 (entry r-1) and j = 0..N (entry j): the mass of
  /// Gamma x Gamma on {alpha ^ beta = r, R_{1,2} = 1 - 2j/N}.
  std::vector<std::vector<double>> pair_distribution() const;

 private:
  friend GibbsSystem build_system(const SystemConfig&, double, std::uint64_t);
  GibbsSystem(Cascade c, HamiltonianTable h)
      : cascade_(std::move(c)), hamiltonian_(std::move(h)) {}

  int n_ = 0;
  double t_ = 0.0;
  Cascade cascade_;
  HamiltonianTable hamiltonian_;
  double log_partition_ = 0.0;
  std::vector<double> probabilities_;
  /// Self-pairs within a remainder: Gamma_a(s1) Gamma_a(s2) times
  /// D2 / D^2 exp(self_rate_ R).
  std::vector<double> tail_ratio_;
  double self_rate_ = 0.0;
};

/// Deterministic in seed; the Hamiltonian is sample_hamiltonian(N, mix, seed)
/// and the cascade build_cascade(rsb, b, seed).
GibbsSystem build_system(const SystemConfig& config, double t,
                         std::uint64_t seed);

struct PhiEstimate {
  Estimate phi;
  double allowance = 0.0;  ///< cascade truncation, per site
};

PhiEstimate phi_t(const SystemConfig& config, double t, std::size_t replicas,
                  std::uint64_t seed);

struct DerivativeReport {
  double t = 0.5;
  double delta = 0.02;
  Estimate numeric;      ///< (phi(t+delta) - phi(t-delta)) / (2 delta)
  double theta_one = 0.0;  ///< -theta(1) / 2
  Estimate theta_term;   ///< E<theta(q_{alpha^beta})> / 2
  Estimate delta_term;   ///< -E<Delta(R, q_{alpha^beta})> / 2
  Estimate formula;      ///< sum of the three terms
  double allowance = 0.0;  ///< delta^2
  CheckRecord check;
};

/// Requires t in [delta, 1 - delta]. The three systems of a replica share
/// their Hamiltonian, cascade and fields.
DerivativeReport derivative_check(const SystemConfig& config, double t,
                                  double delta, std::size_t replicas,
                                  std::uint64_t seed,
                                  double multiplier = kDefaultToleranceMultiplier);

/// E Gamma^{x2}{alpha ^ beta = r} for r = 1..k+1 from the same replicas.
std::vector<OverlapMassEstimate> gibbs_overlap_masses(
    const SystemConfig& config, double t, std::size_t replicas,
    std::uint64_t seed);

OverlapMassEstimate gibbs_overlap_mass(const SystemConfig& config, double t,
                                       int r, std::size_t replicas,
                                       std::uint64_t seed);

// ---- coupled system --------------------------------------------------------

/// Gibbs measure Gamma_r on pairs of configurations x leaves: cascade weights
/// from n_l = m_l / 2 (l < r), n_l = m_l (l >= r), two field copies sharing
/// columns 0..r-1, and the same H_N in both copies.
class CoupledGibbsSystem {
 public:
  int r() const { return r_; }
  const Cascade& cascade() const { return cascade_; }
  /// <f>_r for f a function of R_{1,2}, given as f(1 - 2j/N) for j = 0..N.
  double average(std::span<const double> f_by_overlap) const;
  /// Sum of the joint weights (1 up to rounding).
  double total_probability() const;

 private:
  friend CoupledGibbsSystem build_coupled_system(const SystemConfig&, double,
                                                 int, std::uint64_t);
  CoupledGibbsSystem(Cascade c) : cascade_(std::move(c)) {}

  int r_ = 1;
  int n_ = 0;
  Cascade cascade_;
  /// Per row: normalized joint weight and the two per-copy Gibbs vectors.
  std::vector<double> row_weight_;
  std::vector<double> copy1_, copy2_;
};

/// The n-sequence of the coupled cascade.
RSBParams coupled_parameters(const RSBParams& rsb, int r);

CoupledGibbsSystem build_coupled_system(const SystemConfig& config, double t,
                                        int r, std::uint64_t seed);

/// E <f>_r over replicas of the coupled system, with its truncation allowance.
struct CoupledEstimate {
  Estimate average;
  double allowance = 0.0;
};

CoupledEstimate coupled_average(const SystemConfig& config, double t, int r,
                                ReplicaObservable f, std::size_t replicas,
                                std::uint64_t seed);

struct ErrorTermReport {
  int r = 1;
  double t = 0.5;
  Estimate lhs;  ///< E<Delta(R, q_{alpha^beta}) I(alpha ^ beta = r)>
  Estimate rhs;  ///< (m_r - m_{r-1}) E<Delta(R, q_r)>_r
  double allowance = 0.0;
  /// (m_r - m_{r-1}) mu_r(Delta(R, q_r)) by quadrature, when requested.
  std::optional<double> quadrature;
  CheckRecord check;
};

/// Requires N <= 4 and k <= 2. The two sides use independent replicas.
ErrorTermReport error_term_check(const SystemConfig& config, double t, int r,
                                 std::size_t replicas, std::uint64_t seed,
                                 bool quadrature_cross_check = false,
                                 double multiplier = kDefaultToleranceMultiplier);

/// f(R) tabulated on R = 1 - 2j/N, j = 0..N.
std::vector<double> observable_by_overlap(ReplicaObservable f, int n_sites,
                                          const MixtureFunction& mix, double q);

}  // namespace rsb
