#include <cmath>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "rsb/mixture.hpp"

namespace rsb {
namespace {

MixtureFunction two_four() { return make_mixture({{2, 1.0}, {4, 0.5}}); }

TEST(Mixture, SkValueAtHalf) {
  // xi = x^2 / 2.
  EXPECT_NEAR(MixtureFunction::sk(1.0).xi(0.5), 0.125, 1e-15);
}

TEST(Mixture, VanishesAtZero) {
  for (const auto& mix : {two_four(), MixtureFunction::sk(0.7),
                          make_mixture({{1, 0.3}, {2, 1.0}, {6, 0.2}})}) {
    EXPECT_EQ(mix.xi(0.0), 0.0);
    EXPECT_EQ(theta(mix, 0.0), 0.0);
  }
}

TEST(Mixture, DerivativeMatchesCentralDifference) {
  const auto mix = two_four();
  const double x = 0.3, h = 1e-5;
  EXPECT_NEAR(mix.xi_prime(x), (mix.xi(x + h) - mix.xi(x - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(mix.xi_second(x),
              (mix.xi_prime(x + h) - mix.xi_prime(x - h)) / (2 * h), 1e-8);
}

TEST(Mixture, RejectsNonConvexAndConstantTerms) {
  EXPECT_THROW(make_mixture({{3, 1.0}}), std::invalid_argument);
  EXPECT_THROW(make_mixture({{2, 1.0}, {5, 0.1}}), std::invalid_argument);
  EXPECT_THROW(make_mixture({{0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(make_mixture({}), std::invalid_argument);
  EXPECT_THROW(make_mixture({{2, 1.0}, {2, 0.5}}), std::invalid_argument);
  EXPECT_NO_THROW(make_mixture({{1, 0.4}, {2, 1.0}, {4, 0.3}}));
}

TEST(Mixture, SecondDerivativeNonNegativeOnGrid) {
  const auto mix = make_mixture({{1, 0.5}, {2, 0.8}, {4, 0.6}, {6, 0.3}});
  for (int i = -20; i <= 20; ++i) EXPECT_GE(mix.xi_second(i / 20.0), 0.0);
}

TEST(Theta, Examples) {
  EXPECT_NEAR(theta(MixtureFunction::sk(1.0), 1.0), 0.5, 1e-15);
  // theta(x) = (p - 1) beta^2 x^p for a single term.
  EXPECT_NEAR(theta(make_mixture({{4, 1.0}}), 0.5), 3 * std::pow(0.5, 4), 1e-15);
}

TEST(Theta, EqualsIntegralOfSXiSecond) {
  const auto mix = make_mixture({{1, 0.5}, {2, 1.0}, {4, 0.5}});
  // Composite Simpson on [0, x].
  for (double x : {0.25, 0.5, 0.8, 1.0}) {
    const int n = 2000;
    const double h = x / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = i * h;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      s += w * u * mix.xi_second(u);
    }
    EXPECT_NEAR(theta(mix, x), s * h / 3, 1e-6);
  }
}

TEST(Delta, Examples) {
  const auto sk = MixtureFunction::sk(1.0);
  EXPECT_NEAR(delta(two_four(), 0.37, 0.37), 0.0, 1e-15);
  EXPECT_NEAR(delta(sk, 0.2, 0.6), 0.08, 1e-15);
  EXPECT_NEAR(delta(sk, -1.0, 1.0), 2.0, 1e-15);
}

TEST(Delta, NonNegativeWithZeroDiagonalOnGrid) {
  for (const auto& mix : {two_four(), make_mixture({{1, 0.7}, {2, 0.2}, {6, 1.1}})}) {
    for (int i = -10; i <= 10; ++i) {
      const double a = i / 10.0;
      EXPECT_NEAR(delta(mix, a, a), 0.0, 1e-12);
      for (int j = -10; j <= 10; ++j) EXPECT_GE(delta(mix, a, j / 10.0), -1e-12);
    }
  }
}

TEST(Delta, SkIsHalfSquaredDistance) {
  const auto sk = MixtureFunction::sk(1.3);
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      const double a = i / 5.0, b = j / 5.0;
      EXPECT_NEAR(delta(sk, a, b), 1.69 * (a - b) * (a - b) / 2, 1e-12);
    }
  }
}

TEST(Domain, RejectsArgumentsOutsideUnitInterval) {
  const auto mix = two_four();
  EXPECT_THROW(theta(mix, 1.5), std::domain_error);
  EXPECT_THROW(delta(mix, 0.2, -1.01), std::domain_error);
}

TEST(RSBParams, StoresEndpoints) {
  const RSBParams p({0.4, 0.8}, {0.3, 0.6});
  EXPECT_EQ(p.k(), 2);
  EXPECT_EQ(p.m(0), 0.0);
  EXPECT_EQ(p.q(0), 0.0);
  EXPECT_EQ(p.q(3), 1.0);
  EXPECT_FALSE(p.guerra_endpoint());
  EXPECT_TRUE(RSBParams({0.5, 1.0}, {0.2, 0.4}).guerra_endpoint());
  EXPECT_THROW(p.m(3), std::out_of_range);
}

TEST(RSBParams, ErrorNamesViolatedConstraint) {
  try {
    RSBParams({0.5, 0.3}, {0.1, 0.2});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("m_1 < ... < m_k"), std::string::npos) << e.what();
  }
  try {
    RSBParams({0.3, 0.5}, {0.4, 0.4});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("q"), std::string::npos) << e.what();
  }
}

TEST(RSBParams, AcceptsExactlyStrictlyIncreasingSequences) {
  // Every pair from a grid: accepted iff strictly increasing within (0, 1].
  const double grid[] = {0.0, 0.2, 0.5, 0.9, 1.0};
  for (double a : grid) {
    for (double b : grid) {
      const bool m_ok = 0.0 < a && a < b && b <= 1.0;
      const bool q_ok = 0.0 < a && a < b && b < 1.0;
      if (m_ok) {
        EXPECT_NO_THROW(RSBParams({a, b}, {0.1, 0.2}));
      } else {
        EXPECT_THROW(RSBParams({a, b}, {0.1, 0.2}), std::invalid_argument);
      }
      if (q_ok) {
        EXPECT_NO_THROW(RSBParams({0.1, 0.2}, {a, b}));
      } else {
        EXPECT_THROW(RSBParams({0.1, 0.2}, {a, b}), std::invalid_argument);
      }
    }
  }
  EXPECT_THROW(RSBParams({}, {}), std::invalid_argument);
  EXPECT_THROW(RSBParams({0.5}, {0.2, 0.4}), std::invalid_argument);
}

TEST(RSBParams, SimulationNeedsMkBelowOne) {
  EXPECT_THROW(RSBParams({0.5, 1.0}, {0.2, 0.4}).require_simulable(), std::invalid_argument);
  EXPECT_NO_THROW(RSBParams({0.5, 0.95}, {0.2, 0.4}).require_simulable());
}

TEST(Overlap, TakesValuesOnLattice) {
  const int n = 5;
  for (unsigned a = 0; a < (1u << n); ++a) {
    for (unsigned b = 0; b < (1u << n); ++b) {
      const double r = overlap(a, b, n).r12;
      const double j = (1.0 - r) * n / 2.0;
      EXPECT_NEAR(j, std::round(j), 1e-12);
      EXPECT_GE(r, -1.0);
      EXPECT_LE(r, 1.0);
    }
    EXPECT_EQ(overlap(a, a, n).r12, 1.0);
    EXPECT_EQ(overlap(a, a ^ 31u, n).r12, -1.0);
  }
}

TEST(ModelBlock, RoundTrip) {
  ModelBlock block;
  block.mixture = two_four();
  block.rsb.emplace(std::vector<double>{0.4, 0.8}, std::vector<double>{0.3, 0.6});
  const std::string text = write_model_block(block);
  EXPECT_EQ(read_model_block(text), block);
  EXPECT_EQ(read_model_block("mixture = [[2,1.0],[4,0.5]]\nm = [0.4,0.8]\nq = [0.3,0.6]\n"),
            block);
}

TEST(ModelBlock, RejectsUnknownKeysAndUnpairedSequences) {
  EXPECT_THROW(read_model_block("mixture = [[2,1.0]]\nbeta = 2\n"), std::invalid_argument);
  EXPECT_THROW(read_model_block("mixture = [[2,1.0]]\nm = [0.5]\n"), std::invalid_argument);
  EXPECT_THROW(read_model_block("mixture = [[3,1.0]]\n"), std::invalid_argument);
}

}  // namespace
}  // namespace rsb
