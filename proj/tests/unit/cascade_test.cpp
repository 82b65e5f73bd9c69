#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "rsb/cascade.hpp"
#include "rsb/recursion.hpp"

namespace rsb {
namespace {

const RSBParams kTwoLevel({0.4, 0.8}, {0.3, 0.6});

double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

TEST(BuildCascade, SingleLevelIsPoissonDirichletSample) {
  const RSBParams one({0.6}, {0.5});
  const auto c = build_cascade(one, 50, 9, {.leaf_remainder = false});
  const auto pd = sample_pd(0.6, 50, cascade_block_seed(9, 0, 0));
  ASSERT_EQ(c.leaf_count(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_DOUBLE_EQ(c.v()[i], pd.u[i]);
    EXPECT_NEAR(c.w()[i], pd.w[i], 1e-15);
  }
}

TEST(BuildCascade, NormalizationAndShape) {
  for (bool remainder : {true, false}) {
    const auto c = build_cascade(kTwoLevel, 200, 3, {.leaf_remainder = remainder});
    EXPECT_EQ(c.leaf_count(), 40000u);
    EXPECT_EQ(c.nodes_at(1), 200u);
    EXPECT_NEAR(sum(c.w()) + sum(c.tail_w()), 1.0, 1e-12);
    EXPECT_EQ(c.has_remainder(), remainder);
    if (!remainder) {
      EXPECT_NEAR(sum(c.w()), 1.0, 1e-12);
    }
  }
}

TEST(BuildCascade, SiblingBlocksDecrease) {
  const RSBParams three({0.2, 0.5, 0.9}, {0.2, 0.5, 0.7});
  const int b = 12;
  const auto c = build_cascade(three, b, 14);
  for (int l = 1; l <= 3; ++l) {
    const auto u = c.points(l);
    for (std::size_t i = 0; i < u.size(); ++i) {
      ASSERT_GT(u[i], 0.0);
      if (i % b) {
        ASSERT_LT(u[i], u[i - 1]) << l << " " << i;
      }
    }
  }
  // v is the product of the points along the path.
  for (std::size_t leaf : {0ul, 17ul, 1727ul}) {
    double v = 1.0;
    for (int l = 1; l <= 3; ++l) v *= c.points(l)[ancestor(leaf, l, b, 3)];
    EXPECT_NEAR(c.v()[leaf], v, 1e-14 * v);
  }
}

TEST(BuildCascade, Deterministic) {
  const auto a = build_cascade(kTwoLevel, 30, 5);
  const auto b = build_cascade(kTwoLevel, 30, 5);
  EXPECT_TRUE(std::equal(a.w().begin(), a.w().end(), b.w().begin()));
  EXPECT_TRUE(std::equal(a.tail_w().begin(), a.tail_w().end(), b.tail_w().begin()));
  const auto other = build_cascade(kTwoLevel, 30, 6);
  EXPECT_NE(a.w()[0], other.w()[0]);
}

TEST(BuildCascade, RejectsInvalidConfigurations) {
  EXPECT_THROW(build_cascade(RSBParams({0.4, 1.0}, {0.3, 0.6}), 10, 1), std::invalid_argument);
  EXPECT_THROW(build_cascade(kTwoLevel, 1, 1), std::invalid_argument);
  EXPECT_THROW(build_cascade(kTwoLevel, 1001, 1), std::invalid_argument);
}

TEST(TreeIndex, MeetIsOnePlusCommonPrefix) {
  const int b = 4, k = 3;
  const std::size_t leaves = 64;
  for (std::size_t x = 0; x < leaves; ++x) {
    const auto a = leaf_path(x, b, k);
    EXPECT_EQ(leaf_index(a, b), x);
    for (std::size_t y = 0; y < leaves; ++y) {
      const auto c = leaf_path(y, b, k);
      int prefix = 0;
      while (prefix < k && a.path[prefix] == c.path[prefix]) ++prefix;
      const int expected = prefix == k ? k + 1 : prefix + 1;
      ASSERT_EQ(meet(a, c), expected);
      ASSERT_EQ(meet(x, y, b, k), expected);
    }
  }
}

TEST(OverlapMasses, PartitionOfUnityPerRealization) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (bool remainder : {true, false}) {
      const auto c = build_cascade(kTwoLevel, 40, seed, {.leaf_remainder = remainder});
      const auto masses = overlap_masses(c);
      ASSERT_EQ(masses.size(), 3u);
      EXPECT_NEAR(sum(masses), 1.0, 1e-12);
    }
  }
}

TEST(OverlapMasses, BruteForceOracle) {
  const int b = 6;
  const auto c = build_cascade(kTwoLevel, b, 2, {.leaf_remainder = false});
  std::vector<double> brute(3, 0.0);
  for (std::size_t x = 0; x < c.leaf_count(); ++x)
    for (std::size_t y = 0; y < c.leaf_count(); ++y)
      brute[meet(x, y, b, 2) - 1] += c.w()[x] * c.w()[y];
  const auto masses = overlap_masses(c);
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(masses[r], brute[r], 1e-14);
}

TEST(OverlapMasses, MatchIncrementsOfM) {
  const auto table = overlap_mass_table(kTwoLevel, 100, 1500, 17);
  ASSERT_EQ(table.size(), 3u);
  const double targets[] = {0.4, 0.4, 0.2};
  for (const auto& e : table) {
    EXPECT_DOUBLE_EQ(e.target, targets[e.r - 1]);
    EXPECT_TRUE(e.check().pass) << e.r << " " << e.estimate.mean;
  }
  const RSBParams other({0.25, 0.6, 0.85}, {0.2, 0.4, 0.8});
  for (const auto& e : overlap_mass_table(other, 20, 1500, 18)) {
    EXPECT_TRUE(e.check().pass) << e.r << " " << e.estimate.mean << " vs " << e.target;
  }
  EXPECT_THROW(overlap_mass(kTwoLevel, 10, 4, 100, 1), std::invalid_argument);
}

TEST(Fields, VariancesTelescopeToXiPrime) {
  const auto mix = MixtureFunction::sk(1.2);
  const auto v = column_variances(mix, kTwoLevel);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR(v[0], mix.xi_prime(0.3), 1e-15);
  EXPECT_NEAR(v[0] + v[1], mix.xi_prime(0.6), 1e-15);
  EXPECT_NEAR(v[0] + v[1] + v[2], mix.xi_prime(1.0), 1e-14);
  for (double x : v) EXPECT_GT(x, 0.0);
}

TEST(Fields, EmpiricalCovarianceMatchesXiPrimeOfMeet) {
  const auto mix = make_mixture({{2, 1.0}, {4, 0.5}});
  const int b = 3, k = 2, n = 3;
  // Leaves 0 and 1 meet at level 2, 0 and 3 at level 1, 0 with itself at 3.
  const std::size_t partners[] = {3, 1, 0};
  const int reps = 20000;
  std::vector<std::vector<double>> same(3);
  std::vector<double> cross;
  for (int rep = 0; rep < reps; ++rep) {
    const CascadeFields f(k, b, mix, kTwoLevel, n, replica_seed(41, rep));
    const auto s0 = f.leaf_field(0);
    for (int r = 0; r < 3; ++r) {
      const auto s = f.leaf_field(partners[r]);
      same[r].push_back(s0[0] * s[0]);
    }
    cross.push_back(s0[0] * f.leaf_field(1)[2]);
  }
  const double q[] = {0.3, 0.6, 1.0};
  for (int r = 0; r < 3; ++r) {
    const auto e = summarize(same[r]);
    EXPECT_NEAR(e.mean, mix.xi_prime(q[r]), 3 * e.std_error) << r + 1;
  }
  const auto c = summarize(cross);
  EXPECT_NEAR(c.mean, 0.0, 3 * c.std_error);
}

TEST(Fields, CoupledCopySharesColumnsBelowR) {
  const auto mix = MixtureFunction::sk(1.0);
  const CascadeFields f(2, 5, mix, kTwoLevel, 4, 12);
  const auto g = f.coupled_copy(2, 99);
  EXPECT_EQ(f.column(0, 0), g.column(0, 0));
  EXPECT_EQ(f.column(1, 3), g.column(1, 3));
  EXPECT_NE(f.column(2, 7), g.column(2, 7));
  const auto h = f.coupled_copy(1, 99);
  EXPECT_EQ(f.column(0, 0), h.column(0, 0));
  EXPECT_NE(f.column(1, 3), h.column(1, 3));
  EXPECT_THROW(f.coupled_copy(3, 1), std::invalid_argument);
}

TEST(Fields, ColumnsRegenerateIdentically) {
  const auto mix = MixtureFunction::sk(1.0);
  const CascadeFields a(2, 5, mix, kTwoLevel, 4, 12), b(2, 5, mix, kTwoLevel, 4, 12);
  EXPECT_EQ(a.leaf_field(13), b.leaf_field(13));
  EXPECT_EQ(a.prefix_field(1, 2), b.prefix_field(1, 2));
}

TEST(MarkedCascade, MarksDependOnlyOnSeedAndNode) {
  auto make = [](int b) {
    return MarkedCascade(build_cascade(kTwoLevel, b, 1), default_mark_variances(2), 5);
  };
  const auto a = make(8), b = make(8);
  EXPECT_EQ(a.root_mark(), b.root_mark());
  EXPECT_TRUE(std::equal(a.marks(2).begin(), a.marks(2).end(), b.marks(2).begin()));
  std::vector<double> path(3);
  a.path_marks(19, path);
  EXPECT_EQ(path[0], a.root_mark());
  EXPECT_EQ(path[1], a.marks(1)[19 / 8]);
  EXPECT_EQ(path[2], a.marks(2)[19]);
  EXPECT_THROW(MarkedCascade(build_cascade(kTwoLevel, 4, 1), {0.5}, 1), std::invalid_argument);
}

MarkedOptions small_marked() { return {800, 60, 40, {}}; }

TEST(LogPartition, ConstantIsExact) {
  const auto id = log_partition_identity(kTwoLevel, default_mark_variances(2),
                                         PathFunctional::constant(1.7), small_marked(), 3);
  EXPECT_NEAR(id.mc.mean, 1.7, 1e-12);
  EXPECT_NEAR(id.mc.std_error, 0.0, 1e-12);
  EXPECT_NEAR(id.reference, 1.7, 1e-12);
}

TEST(LogPartition, SingleLevelGaussianClosedForm) {
  // X = g with g ~ N(0, s2) per leaf: (1/m) log E exp(m g) = m s2 / 2.
  const RSBParams one({0.5}, {0.5});
  const std::vector<double> var = {0.0, 0.8};
  const auto x = PathFunctional::linear({0.0, 1.0});
  const double closed = 0.5 * 0.8 / 2;
  EXPECT_NEAR(reference_log_partition(one, var, x, 40), closed, 1e-12);
  const auto id = log_partition_identity(one, var, x, {1500, 200, 40, {}}, 4);
  EXPECT_TRUE(check_equal("closed", id.mc, exact(closed), 3.0, id.allowance).pass)
      << id.mc.mean << " +- " << id.mc.std_error;
}

TEST(LogPartition, TwoLevelSumOfMarks) {
  const auto id = log_partition_identity(kTwoLevel, default_mark_variances(2),
                                         PathFunctional::linear({0.0, 1.0, 1.0}), small_marked(), 6);
  EXPECT_TRUE(id.check().pass) << id.mc.mean << " vs " << id.reference;
}

TEST(Tilted, UnitObservable) {
  const auto x = PathFunctional::linear({1.0, 1.0, 1.0});
  const auto one = PathFunctional::constant(1.0);
  const auto unrestricted =
      tilted_average(kTwoLevel, default_mark_variances(2), x, one, std::nullopt, small_marked(), 7);
  EXPECT_NEAR(unrestricted.mc.mean, 1.0, 1e-12);
  EXPECT_NEAR(unrestricted.reference, 1.0, 1e-10);
  const double targets[] = {0.4, 0.4};
  for (int r = 1; r <= 2; ++r) {
    const auto restricted = tilted_average(kTwoLevel, default_mark_variances(2), x,
                                           PairFunctional::product(one), r, small_marked(), 8);
    EXPECT_NEAR(restricted.reference, targets[r - 1], 1e-10);
    EXPECT_TRUE(restricted.check().pass) << r << " " << restricted.mc.mean;
  }
}

TEST(Tilted, LinearObservables) {
  const auto x = PathFunctional::linear({0.5, 1.0, -0.5});
  const auto y = PathFunctional::linear({0.0, 1.0, 1.0});
  const auto id =
      tilted_average(kTwoLevel, default_mark_variances(2), x, y, std::nullopt, small_marked(), 9);
  EXPECT_TRUE(id.check().pass) << id.mc.mean << " vs " << id.reference;
  const auto pair = tilted_average(kTwoLevel, default_mark_variances(2), x,
                                   PairFunctional::level_mark_product({0.0, 1.0, 1.0}), 2,
                                   small_marked(), 10);
  EXPECT_TRUE(pair.check().pass) << pair.mc.mean << " vs " << pair.reference;
}

TEST(Tilted, RejectsMismatchedObservable) {
  const auto x = PathFunctional::linear({1.0});
  EXPECT_THROW(tilted_average(kTwoLevel, default_mark_variances(2), x,
                              PathFunctional::constant(1.0), 1, small_marked(), 1),
               std::invalid_argument);
  EXPECT_THROW(tilted_average(kTwoLevel, default_mark_variances(2), x,
                              PairFunctional::product(x), 3, small_marked(), 1),
               std::invalid_argument);
}

TEST(TiltInvariance, StatisticsAgree) {
  const auto x = PathFunctional::log_cosh(0.3);
  for (auto stat : {CascadeStatistic::kPairSum, CascadeStatistic::kTopWeight}) {
    const auto p = tilt_invariance(kTwoLevel, default_mark_variances(2), x, stat, small_marked(), 11);
    EXPECT_TRUE(p.check().pass) << p.statistic << " " << p.lhs.mean << " vs " << p.rhs.mean;
  }
}

TEST(Snapshot, ListsLeavesAndRemainders) {
  const auto c = build_cascade(kTwoLevel, 3, 1);
  const auto j = snapshot(c);
  EXPECT_EQ(j["k"], 2);
  EXPECT_EQ(j["leaves"].size(), 9u);
  EXPECT_EQ(j["remainders"].size(), 3u);
}

}  // namespace
}  // namespace rsb
