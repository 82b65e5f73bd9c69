#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "rsb/interpolation.hpp"
#include "rsb/random.hpp"

namespace rsb {
namespace {

SystemConfig small_config(bool remainder = true) {
  SystemConfig c;
  c.n_sites = 3;
  c.mixture = make_mixture({{1, 0.3}, {2, 0.8}});
  c.rsb = RSBParams({0.4, 0.95}, {0.3, 0.7});
  c.branching = 4;
  c.h = 0.2;
  c.cascade.leaf_remainder = remainder;
  return c;
}

SystemConfig criterion_config(int branching) {
  SystemConfig c;
  c.n_sites = 4;
  c.mixture = MixtureFunction::sk(0.5);
  c.rsb = RSBParams({0.4, 0.95}, {0.3, 0.7});
  c.branching = branching;
  c.h = 0.3;
  return c;
}

int spin(unsigned config, int i) { return (config >> i) & 1u ? -1 : 1; }

// Unnormalized log-weight of (alpha, sigma) rebuilt from the public pieces.
struct BruteSystem {
  std::vector<std::vector<double>> log_weight;  // [leaf][config]
  double log_partition = 0.0;
};

BruteSystem brute_force(const SystemConfig& c, double t, std::uint64_t seed) {
  const auto cascade = build_cascade(c.rsb, c.branching, seed, c.cascade);
  const auto table = sample_hamiltonian(c.n_sites, c.mixture, seed);
  const CascadeFields fields(c.rsb.k(), c.branching, c.mixture, c.rsb, c.n_sites, seed);
  BruteSystem out;
  double z = 0.0;
  for (std::size_t leaf = 0; leaf < cascade.leaf_count(); ++leaf) {
    const auto s = fields.leaf_field(leaf);
    std::vector<double> row;
    for (unsigned cfg = 0; cfg < (1u << c.n_sites); ++cfg) {
      double e = std::sqrt(t) * table[cfg];
      for (int i = 0; i < c.n_sites; ++i) e += (std::sqrt(1 - t) * s[i] + c.h) * spin(cfg, i);
      row.push_back(std::log(cascade.w()[leaf]) + e);
      z += std::exp(row.back());
    }
    out.log_weight.push_back(row);
  }
  out.log_partition = std::log(z);
  return out;
}

TEST(Validate, Budgets) {
  auto c = criterion_config(50);
  EXPECT_NO_THROW(validate_system(c));
  c.n_sites = 9;
  EXPECT_THROW(validate_system(c), std::invalid_argument);
  c = criterion_config(101);
  EXPECT_THROW(validate_system(c), std::invalid_argument);
  c = criterion_config(100);
  c.n_sites = 8;
  EXPECT_THROW(validate_system(c), std::invalid_argument);
  c = criterion_config(50);
  c.rsb = RSBParams({0.4, 1.0}, {0.3, 0.7});
  EXPECT_THROW(validate_system(c), std::invalid_argument);
}

TEST(GibbsSystem, NormalizedOnEveryRealization) {
  for (bool remainder : {true, false}) {
    for (double t : {0.0, 0.3, 1.0}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto sys = build_system(small_config(remainder), t, seed);
        EXPECT_NEAR(sys.total_probability(), 1.0, 1e-10);
        EXPECT_EQ(sys.rows(), remainder ? 20u : 16u);
      }
    }
  }
}

TEST(GibbsSystem, MatchesBruteForceEnumeration) {
  const auto c = small_config(false);
  for (double t : {0.0, 0.45, 1.0}) {
    const auto sys = build_system(c, t, 7);
    const auto brute = brute_force(c, t, 7);
    EXPECT_NEAR(sys.log_partition(), brute.log_partition, 1e-12);
    const auto p = sys.probabilities();
    for (std::size_t leaf = 0; leaf < 16; ++leaf) {
      for (unsigned cfg = 0; cfg < 8; ++cfg) {
        EXPECT_NEAR(p[leaf * 8 + cfg], std::exp(brute.log_weight[leaf][cfg] - brute.log_partition),
                    1e-13);
      }
    }
  }
}

TEST(GibbsSystem, PairDistributionBruteForce) {
  const auto c = small_config(false);
  const auto sys = build_system(c, 0.6, 8);
  const auto p = sys.probabilities();
  const int n = c.n_sites, b = c.branching, k = 2;
  std::vector<std::vector<double>> brute(k + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t a = 0; a < 16; ++a)
    for (std::size_t bb = 0; bb < 16; ++bb)
      for (unsigned s1 = 0; s1 < 8; ++s1)
        for (unsigned s2 = 0; s2 < 8; ++s2)
          brute[meet(a, bb, b, k) - 1][__builtin_popcount(s1 ^ s2)] += p[a * 8 + s1] * p[bb * 8 + s2];
  const auto pairs = sys.pair_distribution();
  double total = 0.0;
  for (int r = 0; r <= k; ++r) {
    for (int j = 0; j <= n; ++j) {
      EXPECT_NEAR(pairs[r][j], brute[r][j], 1e-14) << r << " " << j;
      total += pairs[r][j];
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(GibbsSystem, UnitTimeLeafMarginalIsCascadeWeights) {
  for (bool remainder : {true, false}) {
    const auto sys = build_system(small_config(remainder), 1.0, 3);
    const auto p = sys.probabilities();
    const auto& c = sys.cascade();
    for (std::size_t row = 0; row < sys.rows(); ++row) {
      double marginal = 0.0;
      for (std::size_t s = 0; s < sys.configs(); ++s) marginal += p[row * sys.configs() + s];
      const double w = row < sys.leaf_rows() ? c.w()[row] : c.tail_w()[row - sys.leaf_rows()];
      EXPECT_NEAR(marginal, w, 1e-13);
    }
  }
}

TEST(GibbsSystem, ZeroTimeConditionalFactorizesOverSites) {
  const auto sys = build_system(small_config(), 0.0, 4);
  const auto p = sys.probabilities();
  const int n = 3;
  for (std::size_t row = 0; row < sys.rows(); ++row) {
    const auto block = p.subspan(row * 8, 8);
    const double mass = std::accumulate(block.begin(), block.end(), 0.0);
    std::vector<double> plus(n, 0.0);
    for (unsigned s = 0; s < 8; ++s)
      for (int i = 0; i < n; ++i)
        if (spin(s, i) == 1) plus[i] += block[s] / mass;
    for (unsigned s = 0; s < 8; ++s) {
      double product = 1.0;
      for (int i = 0; i < n; ++i) product *= spin(s, i) == 1 ? plus[i] : 1 - plus[i];
      EXPECT_NEAR(block[s] / mass, product, 1e-12);
    }
  }
}

TEST(GibbsSystem, Deterministic) {
  const auto a = build_system(small_config(), 0.5, 11);
  const auto b = build_system(small_config(), 0.5, 11);
  EXPECT_EQ(a.log_partition(), b.log_partition());
  EXPECT_TRUE(std::equal(a.probabilities().begin(), a.probabilities().end(), b.probabilities().begin()));
}

TEST(Phi, NoDisorderIsConstant) {
  auto c = small_config();
  c.mixture = make_mixture({{2, 0.0}});
  for (double t : {0.0, 0.5, 1.0}) {
    const auto p = phi_t(c, t, 20, 5);
    EXPECT_NEAR(p.phi.mean, log_2cosh(0.2), 1e-12) << t;
  }
}

TEST(Phi, EndpointsMatchRecursionAndEnumeration) {
  const auto c = criterion_config(20);
  const auto zero = phi_t(c, 0.0, 600, 12);
  const auto rec = phi0(c.rsb, c.mixture, c.h);
  EXPECT_TRUE(check_equal("t0", zero.phi, exact(rec.phi0), 3.0, zero.allowance).pass)
      << zero.phi.mean << " vs " << rec.phi0;
  const auto one = phi_t(c, 1.0, 600, 12);
  const auto f = exact_free_energy(4, c.mixture, c.h, 600, 12);
  EXPECT_TRUE(check_equal("t1", one.phi, f.free_energy, 3.0, one.allowance).pass);
}

TEST(Derivative, NoDisorderBothSidesVanish) {
  auto c = small_config();
  c.mixture = make_mixture({{2, 0.0}});
  const auto d = derivative_check(c, 0.5, 0.02, 20, 3);
  EXPECT_NEAR(d.numeric.mean, 0.0, 1e-10);
  EXPECT_NEAR(d.formula.mean, 0.0, 1e-12);
  EXPECT_TRUE(d.check.pass);
}

TEST(Derivative, FormulaMatchesCentralDifference) {
  const auto d = derivative_check(criterion_config(20), 0.5, 0.02, 500, 14);
  EXPECT_TRUE(d.check.pass) << d.numeric.mean << " vs " << d.formula.mean;
  EXPECT_NEAR(d.formula.mean, d.theta_one + d.theta_term.mean + d.delta_term.mean, 1e-12);
  EXPECT_DOUBLE_EQ(d.allowance, 0.02 * 0.02);
  // Dropping the Delta term can only increase the formula side.
  EXPECT_LE(d.delta_term.mean, 0.0);
  EXPECT_GE(d.theta_one + d.theta_term.mean, d.formula.mean);
  EXPECT_THROW(derivative_check(criterion_config(20), 0.01, 0.02, 10, 1), std::invalid_argument);
}

TEST(GibbsOverlap, MatchesIncrementsAtSeveralTimes) {
  auto c = criterion_config(20);
  c.rsb = RSBParams({0.4, 0.8}, {0.3, 0.6});
  std::vector<std::vector<OverlapMassEstimate>> by_t;
  for (double t : {0.1, 0.5, 0.9}) {
    by_t.push_back(gibbs_overlap_masses(c, t, 400, 20));
    const double targets[] = {0.4, 0.4, 0.2};
    for (const auto& e : by_t.back()) {
      EXPECT_DOUBLE_EQ(e.target, targets[e.r - 1]);
      EXPECT_TRUE(e.check().pass) << "t " << t << " r " << e.r << " " << e.estimate.mean;
    }
  }
  // t-independence: the same seed gives the same realizations at each t, so
  // compare with the combined error as a conservative bound.
  for (int r = 0; r < 3; ++r) {
    const auto& a = by_t[0][r];
    const auto& b = by_t[2][r];
    EXPECT_TRUE(check_equal("t", a.estimate, b.estimate, 3.0, a.allowance + b.allowance).pass) << r;
  }
  const auto single = gibbs_overlap_mass(c, 0.5, 2, 400, 20);
  EXPECT_EQ(single.estimate.mean, by_t[1][1].estimate.mean);
}

TEST(Coupled, ParametersHalveBelowR) {
  const RSBParams rsb({0.4, 0.8}, {0.3, 0.6});
  const auto one = coupled_parameters(rsb, 1);
  EXPECT_EQ(one.m(1), 0.4);
  EXPECT_EQ(one.m(2), 0.8);
  const auto two = coupled_parameters(rsb, 2);
  EXPECT_EQ(two.m(1), 0.2);
  EXPECT_EQ(two.m(2), 0.8);
  EXPECT_EQ(two.q(1), 0.3);
  EXPECT_THROW(coupled_parameters(rsb, 3), std::invalid_argument);
}

TEST(Coupled, NormalizedAndUnitAverage) {
  for (int r = 1; r <= 2; ++r) {
    for (bool remainder : {true, false}) {
      const auto sys = build_coupled_system(small_config(remainder), 0.4, r, 6);
      EXPECT_NEAR(sys.total_probability(), 1.0, 1e-10);
      const std::vector<double> one(4, 1.0);
      EXPECT_NEAR(sys.average(one), 1.0, 1e-10);
    }
  }
}

TEST(Coupled, NoDisorderGivesProductMeasure) {
  // beta = 0, t = 1: both copies are free spins in field h, so <R> = tanh(h)^2.
  auto c = small_config();
  c.mixture = make_mixture({{2, 0.0}});
  const auto sys = build_coupled_system(c, 1.0, 1, 2);
  const auto f = observable_by_overlap(ReplicaObservable::kOverlap, 3, c.mixture, 0.3);
  EXPECT_NEAR(sys.average(f), std::pow(std::tanh(0.2), 2), 1e-12);
}

TEST(Observable, Tables) {
  const auto mix = MixtureFunction::sk(1.0);
  const auto r = observable_by_overlap(ReplicaObservable::kOverlap, 4, mix, 0.3);
  EXPECT_EQ(r, (std::vector<double>{1.0, 0.5, 0.0, -0.5, -1.0}));
  const auto d = observable_by_overlap(ReplicaObservable::kDelta, 2, mix, 0.3);
  EXPECT_NEAR(d[0], delta(mix, 1.0, 0.3), 1e-15);
  EXPECT_NEAR(d[2], delta(mix, -1.0, 0.3), 1e-15);
}

TEST(ErrorTerm, NoDisorderAgreement) {
  auto c = criterion_config(20);
  c.mixture = make_mixture({{2, 0.0}});
  c.h = 0.0;
  for (int r = 1; r <= 2; ++r) {
    const auto e = error_term_check(c, 0.5, r, 100, 30 + r);
    EXPECT_TRUE(e.check.pass) << r;
    EXPECT_NEAR(e.lhs.mean, 0.0, 1e-12);
  }
}

TEST(ErrorTerm, BothLevelsAgreeAndAreNonNegative) {
  for (int r = 1; r <= 2; ++r) {
    const auto e = error_term_check(criterion_config(20), 0.5, r, 300, 40 + r);
    EXPECT_TRUE(e.check.pass) << r << " " << e.lhs.mean << " vs " << e.rhs.mean;
    EXPECT_GE(e.lhs.mean, 0.0);
    EXPECT_GE(e.rhs.mean, 0.0);
  }
}

TEST(ErrorTerm, SingleSiteQuadratureCrossCheck) {
  SystemConfig c;
  c.n_sites = 1;
  c.mixture = MixtureFunction::sk(0.5);
  c.rsb = RSBParams({0.5}, {0.4});
  c.branching = 100;
  c.h = 0.3;
  const auto e = error_term_check(c, 0.5, 1, 600, 50, true);
  ASSERT_TRUE(e.quadrature.has_value());
  EXPECT_TRUE(check_equal("quad", e.rhs, exact(*e.quadrature), 3.0, e.allowance).pass)
      << e.rhs.mean << " vs " << *e.quadrature;
}

TEST(ErrorTerm, OverlapOfSingleSiteMatchesQuadrature) {
  // t = 0, N = 1, k = 1: E<s1 s2>_1 from the coupled cascade against mu_1.
  SystemConfig c;
  c.n_sites = 1;
  c.mixture = MixtureFunction::sk(0.7);
  c.rsb = RSBParams({0.5}, {0.4});
  c.branching = 100;
  c.h = 0.2;
  const auto mc = coupled_average(c, 0.0, 1, ReplicaObservable::kOverlap, 800, 60);
  const auto quad = mu_r_quadrature(1, c.mixture, c.rsb, c.h, 0.0, 1, ReplicaObservable::kOverlap);
  EXPECT_TRUE(check_equal("mu", mc.average, exact(quad.w_form), 3.0, mc.allowance).pass)
      << mc.average.mean << " vs " << quad.w_form;
}

TEST(ErrorTerm, RejectsLargeSystems) {
  auto c = criterion_config(5);
  c.n_sites = 5;
  EXPECT_THROW(error_term_check(c, 0.5, 1, 10, 1), std::invalid_argument);
}

}  // namespace
}  // namespace rsb
