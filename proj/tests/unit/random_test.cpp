#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "rsb/estimate.hpp"
#include "rsb/parallel.hpp"
#include "rsb/random.hpp"

namespace rsb {
namespace {

TEST(Seeds, DerivationIsPureAndLabelSensitive) {
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(7, 4));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
  EXPECT_EQ(derive_seed(7, {3, 5}), derive_seed(derive_seed(7, 3), 5));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(replica_seed(1, i));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Engine, SameSeedSameStream) {
  Engine a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs |= x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Engine, UniformOpenStaysInside) {
  Engine e(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = e.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(Samplers, NormalAndExponentialMoments) {
  Engine e(11);
  const int n = 200000;
  double s1 = 0, s2 = 0, e1 = 0, e2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(e);
    s1 += z;
    s2 += z * z;
    const double x = standard_exponential(e);
    ASSERT_GT(x, 0.0);
    e1 += x;
    e2 += x * x;
  }
  // Normal: mean 0 (sd 1), second moment 1 (sd sqrt 2). Exponential: mean 1
  // (sd 1), second moment 2 (sd sqrt 20).
  EXPECT_NEAR(s1 / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e1 / n, 1.0, 4 / std::sqrt(n));
  EXPECT_NEAR(e2 / n, 2.0, 4 * std::sqrt(20.0 / n));
}

TEST(Estimate, SummarizeUsesSampleStandardDeviation) {
  const std::vector<double> xs = {1.0, 2.0, 4.0, 7.0};
  const auto e = summarize(xs);
  EXPECT_DOUBLE_EQ(e.mean, 3.5);
  // sample variance = (6.25 + 2.25 + 0.25 + 12.25) / 3 = 7
  EXPECT_DOUBLE_EQ(e.std_error, std::sqrt(7.0 / 4.0));
  EXPECT_EQ(e.replicas, 4u);
  EXPECT_THROW(summarize(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Check, ToleranceRule) {
  const Estimate a{1.0, 0.3, 10}, b{1.9, 0.4, 10};
  // sqrt(0.09 + 0.16) = 0.5
  const auto pass = check_equal("x", a, b, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(pass.tolerance, 1.0);
  EXPECT_TRUE(pass.pass);
  EXPECT_FALSE(check_equal("x", a, b, 1.0, 0.0).pass);
  EXPECT_TRUE(check_equal("x", a, b, 1.0, 0.45).pass);
  EXPECT_FALSE(check_equal("x", b, a, 1.0, 0.0).pass);

  // One-sided: only lhs above rhs counts.
  EXPECT_TRUE(check_at_most("y", exact(0.0), exact(5.0)).pass);
  EXPECT_FALSE(check_at_most("y", exact(5.0), exact(0.0)).pass);
  EXPECT_TRUE(check_at_most("y", exact(5.0), exact(0.0), 3.0, 5.0).pass);
  EXPECT_TRUE(check_at_most("y", exact(0.0), exact(5.0)).one_sided);
}

TEST(Check, NonFiniteValuesFail) {
  EXPECT_FALSE(check_equal("n", exact(std::nan("")), exact(0.0)).pass);
  EXPECT_FALSE(check_equal("n", Estimate{0.0, INFINITY, 3}, exact(0.0)).pass);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto work = [](std::size_t i) {
    Engine e(replica_seed(9, i));
    double s = 0.0;
    for (int j = 0; j < 100; ++j) s += standard_normal(e);
    return s;
  };
  set_worker_count(1);
  const auto one = parallel_map<double>(257, work);
  set_worker_count(4);
  const auto four = parallel_map<double>(257, work);
  set_worker_count(0);
  EXPECT_EQ(one, four);
}

TEST(Parallel, PropagatesExceptions) {
  set_worker_count(3);
  EXPECT_THROW(parallel_map<int>(10, [](std::size_t i) -> int {
                 if (i == 7) throw std::runtime_error("boom");
                 return 0;
               }),
               std::runtime_error);
  set_worker_count(0);
}

}  // namespace
}  // namespace rsb
