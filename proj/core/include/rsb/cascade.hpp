#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsb/estimate.hpp"
#include "rsb/functionals.hpp"
#include "rsb/mixture.hpp"
#include "rsb/pd_process.hpp"

namespace rsb {

// Truncated Derrida-Ruelle cascades.
//
// Nodes at depth l (1 <= l <= k) are numbered 0..b^l - 1 so that the parent
// of node i is i / b; leaves are the nodes at depth k. Every node keeps the b
// largest points of its Poisson process. At the leaf level the points below
// the b-th are replaced, per parent, by their conditional expectations
//   D = E sum u = c^(1-m)/(1-m),   D2 = E sum u^2 = c^(2-m)/(2-m),
// with c the b-th point (the "remainder" of that parent). Without the
// remainder, levels with m close to 1 would lose most of their mass.

struct CascadeOptions {
  bool leaf_remainder = true;
};

/// Seed of the Poisson points attached below node `index` at depth `depth`
/// (depth 0 is the root). The points are those of
/// sample_pd(m_{depth+1}, b, cascade_block_seed(...)).
std::uint64_t cascade_block_seed(std::uint64_t seed, int depth,
                                 std::uint64_t index);

class Cascade {
 public:
  const RSBParams& rsb() const { return rsb_; }
  int k() const { return rsb_.k(); }
  int branching() const { return b_; }
  std::size_t leaf_count() const { return v_.size(); }
  /// b^depth.
  std::size_t nodes_at(int depth) const;

  /// Poisson points u of the nodes at depth l, 1 <= l <= k.
  std::span<const double> points(int l) const;
  /// Product of the points along the path to each node at `depth`.
  std::span<const double> path_product(int depth) const;
  /// Total weight (explicit leaves plus remainders) below each node.
  std::span<const double> node_mass(int depth) const;

  /// Leaf products v_alpha and normalized weights w_alpha = v_alpha / total.
  std::span<const double> v() const { return v_; }
  std::span<const double> w() const { return w_; }

  bool has_remainder() const { return remainder_; }
  /// Per leaf-level parent: remainder mass D, square mass D2 (in units of
  /// the parent's leaf points) and normalized remainder weight V_a D / total.
  std::span<const double> tail_mass() const { return tail_mass_; }
  std::span<const double> tail_square_mass() const { return tail_square_; }
  std::span<const double> tail_w() const { return tail_w_; }

  /// sum of v plus all remainder masses; sum(w) + sum(tail_w) = 1.
  double total() const { return total_; }

  /// Relative truncation error bound of this realization: twice the
  /// mass-weighted relative tails of the truncated levels, plus twice the
  /// relative spread sqrt(D2) / (S + D) of the leaf remainders.
  double truncation_allowance() const { return allowance_; }

  /// Same bound with the leaf spread scaled by `leaf_factor`, for systems
  /// that multiply each remainder by an independent lognormal factor.
  double truncation_allowance(double leaf_factor) const;

 private:
  friend Cascade build_cascade(const RSBParams&, int, std::uint64_t,
                               const CascadeOptions&);
  Cascade(RSBParams rsb, int b) : rsb_(std::move(rsb)), b_(b) {}

  RSBParams rsb_;
  int b_;
  bool remainder_ = true;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> prefix_;
  std::vector<std::vector<double>> mass_;
  std::vector<double> v_, w_;
  std::vector<double> tail_mass_, tail_square_, tail_w_;
  double total_ = 0.0;
  double intermediate_tail_ = 0.0;
  double leaf_spread_ = 0.0;
  double allowance_ = 0.0;
};

/// Requires m_k < 1, b >= 2 and b^k <= 10^6. Deterministic in (rsb, b, seed).
Cascade build_cascade(const RSBParams& rsb, int b, std::uint64_t seed,
                      const CascadeOptions& options = {});

/// Leaf path alpha = (n_1, ..., n_k), 0-based.
struct TreeIndex {
  std::vector<int> path;

  int k() const { return static_cast<int>(path.size()); }
  /// Node index of the ancestor at depth l (l = k gives the leaf itself).
  std::size_t prefix(int l, int b) const;
};

TreeIndex leaf_path(std::size_t leaf, int b, int k);
std::size_t leaf_index(const TreeIndex& alpha, int b);
/// Ancestor of `leaf` at depth l.
std::size_t ancestor(std::size_t leaf, int l, int b, int k);
/// alpha ^ beta: the first level where the paths differ, k + 1 if equal.
int meet(const TreeIndex& a, const TreeIndex& b);
int meet(std::size_t leaf_a, std::size_t leaf_b, int b, int k);

/// Per-realization masses sum_{alpha ^ beta = r} w_alpha w_beta for
/// r = 1..k+1 (entry r - 1). They sum to one up to rounding.
std::vector<double> overlap_masses(const Cascade& cascade);

struct OverlapMassEstimate {
  int r = 1;
  Estimate estimate;
  double target = 0.0;  ///< m_r - m_{r-1}, or 1 - m_k for r = k + 1
  double allowance = 0.0;
  CheckRecord check(double multiplier = kDefaultToleranceMultiplier) const;
};

/// Estimates for every r = 1..k+1 from the same replicas.
std::vector<OverlapMassEstimate> overlap_mass_table(
    const RSBParams& rsb, int b, std::size_t replicas, std::uint64_t seed,
    const CascadeOptions& options = {});

OverlapMassEstimate overlap_mass(const RSBParams& rsb, int b, int r,
                                 std::size_t replicas, std::uint64_t seed,
                                 const CascadeOptions& options = {});

/// Snapshot of paths, v_alpha and w_alpha (and remainders) for debugging.
nlohmann::ordered_json snapshot(const Cascade& cascade);

// ---- Gaussian fields -----------------------------------------------------

/// Field columns z_0 (root) and z_{alpha^l} in R^N with per-coordinate
/// variances v_0..v_k (see column_variances), so that
///   E s_i^alpha s_i^beta = xi'(q_{alpha ^ beta}),  E s_i^alpha s_j^beta = 0.
/// Columns are regenerated on demand from (seed, level, node).
class CascadeFields {
 public:
  CascadeFields(int k, int b, const MixtureFunction& mix,
                const RSBParams& rsb, int n_sites, std::uint64_t seed);

  /// Second copy for the coupled system: columns 0..r-1 equal this copy's,
  /// columns r..k are independent, drawn below `seed`.
  CascadeFields coupled_copy(int r, std::uint64_t seed) const;

  int n_sites() const { return n_; }
  int k() const { return k_; }
  int branching() const { return b_; }
  std::span<const double> variances() const { return variances_; }

  /// Column l of node `node` at depth l; l = 0 is the root column.
  std::vector<double> column(int l, std::size_t node) const;
  /// z_0 + sum of the columns along the path to node `node` at `depth`.
  std::vector<double> prefix_field(int depth, std::size_t node) const;
  /// s^alpha.
  std::vector<double> leaf_field(std::size_t leaf) const;

 private:
  int k_, b_, n_;
  std::vector<double> variances_;
  std::uint64_t seed_;
  std::uint64_t shared_seed_;
  int shared_below_ = 0;
};

CascadeFields attach_fields(const Cascade& cascade, const MixtureFunction& mix,
                            int n_sites, std::uint64_t seed);

// ---- marked cascades -------------------------------------------------------

/// A cascade with one scalar Gaussian mark per node, z_l ~ N(0, variance_l),
/// plus a root mark z_0. Marks depend only on (seed, level, node).
class MarkedCascade {
 public:
  MarkedCascade(Cascade cascade, std::vector<double> mark_variances,
                std::uint64_t seed);

  const Cascade& cascade() const { return cascade_; }
  std::span<const double> mark_variances() const { return variances_; }
  double root_mark() const { return root_; }
  /// Marks of the nodes at depth l, 1 <= l <= k.
  std::span<const double> marks(int l) const;
  /// (z_0, z_{alpha^1}, ..., z_{alpha^k}).
  void path_marks(std::size_t leaf, std::span<double> out) const;
  /// Marks of the path to the leaf-level parent a, with the last slot left
  /// for a fresh leaf mark.
  void parent_marks(std::size_t parent, std::span<double> out) const;

 private:
  Cascade cascade_;
  std::vector<double> variances_;
  double root_ = 0.0;
  std::vector<std::vector<double>> marks_;
};

/// Mark variances used when a check needs a default: 0.5 at every level.
std::vector<double> default_mark_variances(int k);

struct IdentityEstimate {
  std::string name;
  Estimate mc;
  double reference = 0.0;
  double allowance = 0.0;
  CheckRecord check(double multiplier = kDefaultToleranceMultiplier) const;
};

struct MarkedOptions {
  std::size_t replicas = 2000;
  int branching = 100;
  /// Gauss-Hermite nodes for the reference and for remainder averages.
  int nodes = 40;
  CascadeOptions cascade;
};

/// E log sum_alpha w_alpha exp X_alpha against the recursion value E X_0.
IdentityEstimate log_partition_identity(const RSBParams& rsb,
                                        std::span<const double> mark_variances,
                                        const PathFunctional& x,
                                        const MarkedOptions& options,
                                        std::uint64_t seed);

using TiltedObservable = std::variant<PathFunctional, PairFunctional>;

/// Unrestricted (restricted_r empty, single-path Y):
///   E sum v e^X Y / sum v e^X   vs   E prod W_l Y.
/// Restricted at r (two-path Y):
///   E sum_{alpha^beta=r} v v e^{X+X} Y / (sum v e^X)^2   vs
///   (m_r - m_{r-1}) M_r.
IdentityEstimate tilted_average(const RSBParams& rsb,
                                std::span<const double> mark_variances,
                                const PathFunctional& x,
                                const TiltedObservable& y,
                                std::optional<int> restricted_r,
                                const MarkedOptions& options,
                                std::uint64_t seed);

enum class CascadeStatistic { kPairSum, kTopWeight };

/// Menu statistics of the weights v e^{X - X_0} (lhs) and v (rhs), normalized,
/// on the same realizations.
PairedEstimate tilt_invariance(const RSBParams& rsb,
                               std::span<const double> mark_variances,
                               const PathFunctional& x,
                               CascadeStatistic statistic,
                               const MarkedOptions& options,
                               std::uint64_t seed);

}  // namespace rsb
