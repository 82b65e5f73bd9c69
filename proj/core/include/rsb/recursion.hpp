#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rsb/functionals.hpp"
#include "rsb/mixture.hpp"
#include "rsb/nelder_mead.hpp"
#include "rsb/quadrature.hpp"

namespace rsb {

// Backward smoothing recursion
//   X_{l-1} = (1/m_l) log E_l exp(m_l X_l),   l = k, ..., 1,
// evaluated by tensor-product Gauss-Hermite quadrature over the Gaussian
// columns. m = 0 is the plain expectation and m = 1 the log-mean-exp, both as
// exact limits of the same formula.

inline constexpr double kMaxTensorPoints = 1e7;

struct QuadratureSpec {
  int nodes_per_level = 40;
  /// Re-evaluate with doubled nodes and report the change.
  bool convergence_check = false;

  /// Throws unless nodes_per_level >= 8.
  void validate() const;
};

/// Largest node count <= requested with nodes^dims <= kMaxTensorPoints.
/// Throws when that falls below 8.
int tensor_nodes(int requested, int dims);

using ScalarFunction = std::function<double(double)>;

/// x -> (1/m) log E exp(m g(x + z)), z ~ N(0, variance). Requires m in [0, 1]
/// and variance >= 0; variance 0 returns g itself.
ScalarFunction smoothing_step(ScalarFunction g, double m, double variance,
                              const GaussHermiteRule& rule);

std::vector<double> tabulate(const ScalarFunction& g,
                             std::span<const double> grid);

/// Column variances v_0..v_k of the Gaussian field: v_l = xi'(q_{l+1}) -
/// xi'(q_l) for l >= 1 and v_0 = xi'(q_1), so that the field covariance of
/// two leaves meeting at level r is exactly xi'(q_r).
std::vector<double> column_variances(const MixtureFunction& mix,
                                     const RSBParams& rsb);

struct RecursionResult {
  double phi0 = 0.0;
  std::vector<double> variances;  ///< v_0..v_k
  /// Grid on which the level functions are tabulated.
  std::vector<double> grid;
  /// level_functions[l - 1] holds g_l on `grid` for l = 1..k+1, where
  /// g_{k+1}(x) = log 2 cosh(x + h).
  std::vector<std::vector<double>> level_functions;
  int quad_nodes = 0;
  bool converged = true;
  /// |phi0(2n) - phi0(n)| when the convergence check ran, else 0.
  double refinement_change = 0.0;
};

/// Per-site value of the recursion at t = 0. m_k = 1 is allowed.
RecursionResult phi0(const RSBParams& rsb, const MixtureFunction& mix,
                     double h, const QuadratureSpec& quad = {});

/// phi0 without tabulation or refinement; the optimizer's inner loop.
double phi0_value(const RSBParams& rsb, const MixtureFunction& mix, double h,
                  int nodes);

struct BoundResult {
  double phi0 = 0.0;
  double bound = 0.0;
  int quad_nodes = 0;
  bool converged = true;
  double refinement_change = 0.0;
};

/// B(m, q) = phi0 - theta(1)/2 + (1/2) sum_r (m_r - m_{r-1}) theta(q_r).
/// Requires m_k = 1.
BoundResult guerra_bound(const RSBParams& rsb, const MixtureFunction& mix,
                         double h, const QuadratureSpec& quad = {});
double guerra_bound_value(const RSBParams& rsb, const MixtureFunction& mix,
                          double h, int nodes);

struct OptimizerConfig {
  NelderMeadOptions nelder_mead;
  int restarts = 5;
};

struct OptimizeResult {
  RSBParams params{{1.0}, {0.5}};
  double bound = 0.0;
  bool converged = false;
  int evaluations = 0;
  /// Best value reached from each restart, in restart order.
  std::vector<double> restart_values;
};

/// Minimizes B over (m_1..m_{k-1}, q_1..q_k) with m_k = 1, through a sorted
/// logistic reparameterization. Requires 1 <= k <= 3 and restarts in [1, 5].
OptimizeResult optimize_bound(const MixtureFunction& mix, double h, int k,
                              const QuadratureSpec& quad = {},
                              const OptimizerConfig& config = {});

/// Maps unconstrained coordinates to RSB parameters with m_k = 1; throws
/// std::invalid_argument on ties.
RSBParams decode_bound_parameters(std::span<const double> x, int k);

// ---- references for marked cascades ------------------------------------
//
// A leaf carries marks (z_0, ..., z_k) with z_l ~ N(0, mark_variances[l]),
// shared along tree paths. m_k may be 1.

/// E X_0, the value of E log sum_alpha w_alpha exp X_alpha.
double reference_log_partition(const RSBParams& rsb,
                               std::span<const double> mark_variances,
                               const PathFunctional& x, int nodes);

/// E prod_{l=1..k} W_l Y with W_l = exp m_l (X_l - X_{l-1}).
double reference_tilted(const RSBParams& rsb,
                        std::span<const double> mark_variances,
                        const PathFunctional& x, const PathFunctional& y,
                        int nodes);

/// M_r = E prod_{l<r} W_l prod_{l>=r} W_l^1 W_l^2 Y(z^1, z^2) for two copies
/// sharing the marks of levels 0..r-1. Requires 1 <= r <= k.
double reference_restricted(const RSBParams& rsb,
                            std::span<const double> mark_variances,
                            const PathFunctional& x, const PairFunctional& y,
                            int r, int nodes);

// ---- the measures mu_r ---------------------------------------------------

enum class ReplicaObservable {
  kOne,      ///< f = 1
  kOverlap,  ///< f = R_{1,2}
  kDelta,    ///< f = Delta(R_{1,2}, q_r)
};

struct MuQuadratureResult {
  double w_form = 0.0;  ///< E prod W^1 [W^2] <f>
  double v_form = 0.0;  ///< E prod V_l <f>
  double normalization = 0.0;  ///< the W form with f = 1
  /// Largest |V_l - W_l^1 W_l^2| (or |V_l - W_l^1| below r) over the grid.
  double max_factor_gap = 0.0;
  int nodes = 0;
  int dims = 0;
};

/// mu_r(f) at time t for N <= 2 spins and k <= 2 levels, by tensor quadrature
/// over the Hamiltonian's Gaussian coordinates and every field column of the
/// coupled pair. The Hamiltonian includes the field term h sum sigma_i.
MuQuadratureResult mu_r_quadrature(int n_sites, const MixtureFunction& mix,
                                   const RSBParams& rsb, double h, double t,
                                   int r, ReplicaObservable f,
                                   const QuadratureSpec& quad = {});

}  // namespace rsb
