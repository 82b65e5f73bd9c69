#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsb/estimate.hpp"
#include "rsb/random.hpp"

namespace rsb {

// Poisson-Dirichlet PD(m, 0) point processes, sampled through the decreasing
// points u_n = (m Gamma_n)^(-1/m) of a Poisson process with intensity
// x^(-1-m) dx, where Gamma_n are the arrival times of a unit-rate Poisson
// stream.

/// Appends the next `count` points of the process to `out`, continuing from
/// the arrival time `gamma` (updated in place; start from 0).
void append_poisson_points(double m, std::size_t count, Engine& engine,
                           double& gamma, std::vector<double>& out);

/// Conditional expectation of the mass below a cutoff: given the largest
/// points down to `cutoff`, the rest form a Poisson process on (0, cutoff), so
///   E sum u_n   = cutoff^(1-m) / (1-m),
///   E sum u_n^2 = cutoff^(2-m) / (2-m).
struct PoissonRemainder {
  double mass = 0.0;
  double square_mass = 0.0;
};
PoissonRemainder poisson_remainder(double m, double cutoff);

struct PDRealization {
  double m = 0.5;
  std::vector<double> u;  ///< strictly decreasing, positive
  std::vector<double> w;  ///< u / sum(u)
  double total = 0.0;
  /// Expected truncated mass beyond n_max relative to the kept mass.
  double tail_bound = 0.0;
};

/// Requires 0 < m < 1 and n_max >= 10. Deterministic in (m, n_max, seed), and
/// the first n points do not depend on n_max.
PDRealization sample_pd(double m, std::size_t n_max, std::uint64_t seed);

struct PairSumEstimate {
  Estimate estimate;  ///< of E sum_n w_n^2
  double target = 0.0;  ///< 1 - m
  double tail_bound = 0.0;  ///< mean relative truncated mass
  /// Upper bound on the truncation bias of the estimate, mean of
  /// 2 * tail_bound * sum w^2 over replicas.
  double allowance = 0.0;
};

/// Requires replicas >= 100.
PairSumEstimate estimate_pair_sum(double m, std::size_t n_max,
                                  std::size_t replicas, std::uint64_t seed);

// ---- marks --------------------------------------------------------------

enum class MarkFamily { kConstant, kLogNormal, kDiscrete };

struct MarkPair {
  double x = 1.0;
  double y = 1.0;
};

struct DiscreteAtom {
  double x = 1.0;
  double y = 1.0;
  double probability = 1.0;
};

/// I.i.d. marks (X_n, Y_n) with X > 0, from a closed menu of families.
class MarkSpec {
 public:
  /// X = x, Y = y.
  static MarkSpec constant(double x, double y);
  /// X = shift + exp(sigma G1), Y = rho G1 + sqrt(1 - rho^2) G2.
  static MarkSpec log_normal(double sigma, double rho, double shift = 0.0);
  /// Finitely many atoms; probabilities are normalized.
  static MarkSpec discrete(std::vector<DiscreteAtom> atoms);

  MarkPair sample(Engine& engine) const;
  /// Infimum of the support of X.
  double min_x() const;
  /// E X and E |Y|, closed form per family. Used only to scale truncation
  /// allowances.
  double mean_x() const;
  double mean_abs_y() const;
  MarkFamily family() const { return family_; }
  const std::vector<DiscreteAtom>& atoms() const { return atoms_; }
  std::string describe() const;

 private:
  MarkFamily family_ = MarkFamily::kConstant;
  double a_ = 1.0, b_ = 1.0, c_ = 0.0;
  std::vector<DiscreteAtom> atoms_;
  std::vector<double> cumulative_;
};

/// The law of a mark under the change of density X^m / E X^m, represented by
/// a weighted Monte Carlo pool drawn from the mark distribution.
class TiltedLaw {
 public:
  TiltedLaw(const MarkSpec& spec, double m, std::size_t pool_size,
            std::uint64_t seed);
  /// Pool estimate of E X^m.
  double mean_x_pow_m() const { return mean_weight_; }
  MarkPair sample(Engine& engine) const;

 private:
  std::vector<MarkPair> pool_;
  std::vector<double> cumulative_;
  double mean_weight_ = 1.0;
};

enum class PdStatistic {
  kPairSum,       ///< sum of squared normalized weights
  kTopWeight,     ///< largest normalized weight
  kWeightedMark,  ///< sum of normalized weights times Y
  kLogTopPoint,   ///< log of the largest unnormalized point
};

std::string to_string(PdStatistic s);
PdStatistic parse_pd_statistic(const std::string& name);

/// A statistic evaluated on two processes that should agree in law.
struct PairedEstimate {
  std::string statistic;
  Estimate lhs;
  Estimate rhs;
  std::size_t n_max = 0;
  double allowance = 0.0;

  CheckRecord check(double multiplier = kDefaultToleranceMultiplier) const;
};

nlohmann::ordered_json to_json(const PairedEstimate& p,
                               double multiplier = kDefaultToleranceMultiplier);
std::string csv_header();
std::string csv_row(const PairedEstimate& p,
                    double multiplier = kDefaultToleranceMultiplier);

struct InvarianceOptions {
  std::size_t replicas = 2000;
  std::size_t n_max = 2000;
  std::size_t pool_size = 200000;
};

/// Evaluates `statistic` on (u_n X_n, Y_n) [lhs] and on
/// ((E X^m)^(1/m) u_n, Y'_n) with Y' from the tilted law [rhs]. Both sides
/// share the Poisson points of each replica.
PairedEstimate verify_invariance(double m, const MarkSpec& marks,
                                 PdStatistic statistic,
                                 const InvarianceOptions& options,
                                 std::uint64_t seed);

struct CorollaryOptions {
  std::size_t replicas = 5000;
  std::size_t n_max = 2000;
  /// Mark-side Monte Carlo: batches x batch_size draws.
  std::size_t mark_batches = 200;
  std::size_t mark_batch_size = 5000;
};

/// The three ratio identities for E sum u Y / sum u X and its second moments.
/// Requires X >= 1 on the support and replicas >= 1000.
std::vector<PairedEstimate> corollary_moments(double m, const MarkSpec& marks,
                                              const CorollaryOptions& options,
                                              std::uint64_t seed);

}  // namespace rsb
