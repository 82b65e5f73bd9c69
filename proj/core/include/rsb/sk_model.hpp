#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsb/estimate.hpp"
#include "rsb/mixture.hpp"
#include "rsb/recursion.hpp"

namespace rsb {

inline constexpr int kMaxEnumeratedSites = 14;

/// H_N(sigma) for every configuration of N <= 14 spins, with
///   H_N(sigma) = sum_p beta_p N^{-(p-1)/2} sum_{i_1..i_p} g_{i_1..i_p}
///                sigma_{i_1} ... sigma_{i_p},
/// repeated indices included, so that E H(s1) H(s2) = N xi(R_{1,2}) exactly.
/// Configuration c encodes sigma_i = -1 when bit i of c is set.
class HamiltonianTable {
 public:
  int n_sites() const { return n_; }
  std::span<const double> values() const { return values_; }
  double operator[](unsigned config) const { return values_[config]; }
  /// Gaussian tensor of each mixture term, indices in lexicographic order.
  const std::vector<std::vector<double>>& coefficients() const {
    return coefficients_;
  }

 private:
  friend HamiltonianTable sample_hamiltonian(int, const MixtureFunction&,
                                             std::uint64_t);
  int n_ = 0;
  std::vector<double> values_;
  std::vector<std::vector<double>> coefficients_;
};

/// Requires 1 <= N <= 14 and p <= 4 in every term.
HamiltonianTable sample_hamiltonian(int n_sites, const MixtureFunction& mix,
                                    std::uint64_t seed);

/// sum_i sigma_i for configuration `config`.
inline int magnetization(unsigned config, int n_sites) {
  return n_sites - 2 * __builtin_popcount(config);
}

/// log sum_sigma exp(H(sigma) + h sum_i sigma_i).
double log_partition(const HamiltonianTable& table, double h);

struct FreeEnergyEstimate {
  int n_sites = 0;
  Estimate free_energy;  ///< of F_N = N^{-1} E log Z
  std::size_t replicas = 0;
  /// Per-replica log Z, in replica order.
  std::vector<double> log_partitions;
};

/// Requires disorder_replicas >= 200.
FreeEnergyEstimate exact_free_energy(int n_sites, const MixtureFunction& mix,
                                     double h, std::size_t disorder_replicas,
                                     std::uint64_t seed);

nlohmann::ordered_json to_json(const FreeEnergyEstimate& f);

struct BoundReport {
  FreeEnergyEstimate free_energy;
  RSBParams params{{1.0}, {0.5}};
  double bound = 0.0;
  double phi0 = 0.0;
  bool optimized = false;
  /// B - F_N; negative values mean the bound is violated by the estimate.
  double margin = 0.0;
  CheckRecord check;
};

/// F_N against B at the given parameters (which must have m_k = 1), or at
/// the optimized parameters of depth `optimize_k` when `rsb` is empty.
/// Passes iff F_N - B <= multiplier * SE, up to a rounding allowance of
/// 64 eps (1 + |B|).
BoundReport verify_bound(int n_sites, const MixtureFunction& mix, double h,
                         const std::optional<RSBParams>& rsb, int optimize_k,
                         std::size_t disorder_replicas,
                         const QuadratureSpec& quad, std::uint64_t seed,
                         double multiplier = kDefaultToleranceMultiplier);

}  // namespace rsb
