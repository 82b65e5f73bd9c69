#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rsb/estimate.hpp"
#include "rsb/random.hpp"
#include "rsb/recursion.hpp"

namespace rsb {
namespace {

const double kLog2 = std::log(2.0);

TEST(SmoothingStep, ZeroVarianceIsIdentity) {
  const auto& rule = gauss_hermite(40);
  const ScalarFunction g = [](double x) { return std::sin(x) + x * x; };
  for (double m : {0.0, 0.3, 1.0}) {
    const auto s = smoothing_step(g, m, 0.0, rule);
    for (double x : {-1.0, 0.2, 2.5}) EXPECT_EQ(s(x), g(x));
  }
}

TEST(SmoothingStep, LinearFunctionGainsHalfMVariance) {
  const auto& rule = gauss_hermite(40);
  const ScalarFunction g = [](double x) { return x; };
  for (double m : {0.0, 0.25, 0.5, 1.0}) {
    const auto s = smoothing_step(g, m, 0.8, rule);
    for (double x : {-1.0, 0.0, 0.7}) EXPECT_NEAR(s(x), x + m * 0.8 / 2, 1e-12) << m;
  }
}

TEST(SmoothingStep, LogCoshAtUnitExponent) {
  // E 2 cosh(x + z) = 2 e^{v/2} cosh x.
  const auto& rule = gauss_hermite(40);
  const ScalarFunction g = [](double x) { return log_2cosh(x); };
  const double v = 0.7;
  const auto s = smoothing_step(g, 1.0, v, rule);
  for (double x : {0.0, 0.4, -1.3}) EXPECT_NEAR(s(x), log_2cosh(x) + v / 2, 1e-12);
  EXPECT_NEAR(s(0.0), std::log(2 * std::exp(v / 2)), 1e-12);
}

TEST(SmoothingStep, NondecreasingInM) {
  const auto& rule = gauss_hermite(40);
  const ScalarFunction g = [](double x) { return log_2cosh(x + 0.2) + 0.3 * std::sin(3 * x); };
  std::vector<double> grid;
  for (int i = -30; i <= 30; ++i) grid.push_back(i / 10.0);
  std::vector<double> previous;
  for (double m : {0.0, 0.5, 1.0}) {
    const auto values = tabulate(smoothing_step(g, m, 1.1, rule), grid);
    if (!previous.empty()) {
      for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(values[i], previous[i] - 1e-14);
    }
    previous = values;
  }
}

TEST(SmoothingStep, RejectsInvalidArguments) {
  const auto& rule = gauss_hermite(8);
  const ScalarFunction g = [](double x) { return x; };
  EXPECT_THROW(smoothing_step(g, 1.5, 1.0, rule), std::invalid_argument);
  EXPECT_THROW(smoothing_step(g, 0.5, -1.0, rule), std::invalid_argument);
}

TEST(Quadrature, NodeBudget) {
  EXPECT_THROW(phi0(RSBParams({0.3, 0.7, 1.0}, {0.2, 0.5, 0.8}), MixtureFunction::sk(1.0), 0.0,
                    {40, true}),
               std::domain_error);
  EXPECT_THROW(QuadratureSpec{7}.validate(), std::invalid_argument);
  EXPECT_EQ(tensor_nodes(40, 2), 40);
  EXPECT_LE(std::pow(tensor_nodes(40, 5), 5), kMaxTensorPoints);
  EXPECT_THROW(tensor_nodes(40, 9), std::domain_error);
}

TEST(Phi0, DegenerateMixtureIsLogTwoCosh) {
  const auto zero = make_mixture({{2, 0.0}});
  const auto r = phi0(RSBParams({0.5, 1.0}, {0.3, 0.6}), zero, 0.5);
  EXPECT_NEAR(r.phi0, std::log(2 * std::cosh(0.5)), 1e-12);
  EXPECT_NEAR(r.phi0, 0.8132617, 1e-7);
}

TEST(Phi0, ReplicaSymmetricEndpointClosedForm) {
  // q_1 -> 0 leaves one column of variance xi'(1) = beta^2 smoothed at m = 1.
  for (double beta : {0.4, 1.0}) {
    for (double h : {0.0, 0.3}) {
      const auto r = phi0(RSBParams({1.0}, {1e-12}), MixtureFunction::sk(beta), h);
      EXPECT_NEAR(r.phi0, log_2cosh(h) + beta * beta / 2, 1e-6) << beta << " " << h;
    }
  }
}

TEST(Phi0, RefinementChangesLessThanTolerance) {
  const auto mix = make_mixture({{2, 0.9}, {4, 0.4}});
  const RSBParams configs[] = {RSBParams({0.4, 1.0}, {0.3, 0.6}),
                               RSBParams({0.3, 0.7, 1.0}, {0.2, 0.5, 0.8}),
                               RSBParams({0.4, 0.95}, {0.3, 0.7})};
  for (const auto& rsb : configs) {
    // Doubling must stay inside the tensor budget: 48^4 < 10^7 < 80^4.
    const int nodes = rsb.k() == 3 ? 24 : 40;
    const auto r = phi0(rsb, mix, 0.3, {nodes, true});
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.refinement_change, 1e-7);
    EXPECT_NEAR(phi0_value(rsb, mix, 0.3, nodes), r.phi0, 1e-12);
  }
}

TEST(Phi0, VariancesArePositive) {
  const auto r = phi0(RSBParams({0.3, 0.7, 1.0}, {0.2, 0.5, 0.8}), MixtureFunction::sk(1.0), 0.0);
  ASSERT_EQ(r.variances.size(), 4u);
  for (double v : r.variances) EXPECT_GT(v, 0.0);
  EXPECT_EQ(r.level_functions.size(), 4u);
}

TEST(Phi0, MonteCarloOracleOverGaussianPaths) {
  // For k = 1, X_0 = E_{z0} (1/m) log E_{z1} 2cosh(z0 + z1 + h)^m; nest plain
  // Monte Carlo over both columns.
  const auto mix = MixtureFunction::sk(0.8);
  const RSBParams rsb({0.5}, {0.4});
  const double h = 0.2, m = 0.5;
  const auto v = column_variances(mix, rsb);
  Engine e(19);
  std::vector<double> outer;
  for (int i = 0; i < 400; ++i) {
    const double z0 = std::sqrt(v[0]) * standard_normal(e);
    double inner = 0.0;
    const int n = 4000;
    for (int j = 0; j < n; ++j) {
      inner += std::exp(m * log_2cosh(z0 + std::sqrt(v[1]) * standard_normal(e) + h));
    }
    outer.push_back(std::log(inner / n) / m);
  }
  const auto mc = summarize(outer);
  // Inner averages carry a small log bias of order Var / n.
  EXPECT_NEAR(phi0(rsb, mix, h).phi0, mc.mean, 3 * mc.std_error + 1e-3);
}

TEST(GuerraBound, ReplicaSymmetricClosedForm) {
  // log 2 + beta^2 / 2 - beta^2 / 4.
  const auto b = guerra_bound(RSBParams({1.0}, {1e-12}), MixtureFunction::sk(0.6), 0.0);
  EXPECT_NEAR(b.bound, kLog2 + 0.36 / 4, 1e-6);
  EXPECT_NEAR(b.bound, 0.7831, 1e-4);
}

TEST(GuerraBound, DegenerateMixture) {
  const auto zero = make_mixture({{2, 0.0}, {4, 0.0}});
  const auto b = guerra_bound(RSBParams({0.5, 1.0}, {0.2, 0.7}), zero, 0.4);
  EXPECT_NEAR(b.bound, log_2cosh(0.4), 1e-12);
}

TEST(GuerraBound, MatchesAssembledFormula) {
  const auto mix = make_mixture({{2, 1.0}, {4, 0.3}});
  const RSBParams rsb({0.4, 1.0}, {0.3, 0.7});
  const auto b = guerra_bound(rsb, mix, 0.1);
  const double expected = b.phi0 - theta(mix, 1.0) / 2 +
                          0.5 * (0.4 * theta(mix, 0.3) + 0.6 * theta(mix, 0.7));
  EXPECT_NEAR(b.bound, expected, 1e-13);
  EXPECT_NEAR(guerra_bound_value(rsb, mix, 0.1, 40), b.bound, 1e-12);
  EXPECT_THROW(guerra_bound(RSBParams({0.4, 0.9}, {0.3, 0.7}), mix, 0.0), std::invalid_argument);
}

TEST(Optimize, ReplicaSymmetricBelowCriticalTemperature) {
  const auto mix = MixtureFunction::sk(0.4);
  const auto r = optimize_bound(mix, 0.0, 1);
  EXPECT_NEAR(r.bound, kLog2 + 0.16 / 4, 1e-3);
  EXPECT_LT(r.params.q(1), 0.05);
  // Grid-scan oracle: the bound over q_1 is smallest at the smallest q_1.
  std::vector<double> scan;
  for (int i = 1; i <= 19; ++i) {
    scan.push_back(guerra_bound_value(RSBParams({1.0}, {i / 20.0}), mix, 0.0, 40));
  }
  EXPECT_EQ(std::min_element(scan.begin(), scan.end()) - scan.begin(), 0);
  EXPECT_LE(r.bound, scan.front() + 1e-9);
}

TEST(Optimize, DeeperBreakingNeverHurts) {
  for (double beta : {0.4, 1.5}) {
    const auto mix = MixtureFunction::sk(beta);
    const auto k1 = optimize_bound(mix, 0.0, 1);
    const auto k2 = optimize_bound(mix, 0.0, 2);
    EXPECT_LE(k2.bound, k1.bound + 1e-6) << beta;
    EXPECT_EQ(k2.params.k(), 2);
    EXPECT_TRUE(k2.params.guerra_endpoint());
  }
}

TEST(Optimize, ReproducibleAndRecordsRestarts) {
  const auto mix = MixtureFunction::sk(1.2);
  const auto a = optimize_bound(mix, 0.1, 2);
  const auto b = optimize_bound(mix, 0.1, 2);
  EXPECT_EQ(a.bound, b.bound);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.restart_values.size(), 5u);
  EXPECT_EQ(*std::min_element(a.restart_values.begin(), a.restart_values.end()), a.bound);
  EXPECT_THROW(optimize_bound(mix, 0.0, 4), std::invalid_argument);
}

TEST(DecodeBoundParameters, AlwaysAdmissible) {
  Engine e(3);
  for (int k = 1; k <= 3; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> x(2 * k - 1);
      for (double& xi : x) xi = 3 * standard_normal(e);
      try {
        const RSBParams p = decode_bound_parameters(x, k);
        EXPECT_EQ(p.k(), k);
        EXPECT_TRUE(p.guerra_endpoint());
      } catch (const std::invalid_argument&) {
        // Ties after rounding are reported, never silently accepted.
      }
    }
  }
  EXPECT_THROW(decode_bound_parameters(std::vector<double>{0.0, 0.0}, 1), std::invalid_argument);
}

TEST(References, UnitObservableHasUnitWeight) {
  const RSBParams rsb({0.4, 0.8}, {0.3, 0.6});
  const std::vector<double> var = {0.5, 0.5, 0.5};
  const auto x = PathFunctional::linear({1.0, 1.0, 1.0});
  EXPECT_NEAR(reference_tilted(rsb, var, x, PathFunctional::constant(1.0), 40), 1.0, 1e-10);
  for (int r = 1; r <= 2; ++r) {
    EXPECT_NEAR(reference_restricted(rsb, var, x, PairFunctional::product(PathFunctional::constant(1.0)), r, 40),
                1.0, 1e-10);
  }
}

TEST(References, LinearLogPartitionClosedForm) {
  // X = sum_l c_l z_l: X_0 = c_0 z_0 expectation 0 plus sum_{l>=1} m_l c_l^2 s_l / 2.
  const RSBParams rsb({0.4, 0.8}, {0.3, 0.6});
  const std::vector<double> var = {0.5, 0.3, 0.7};
  const auto x = PathFunctional::linear({1.0, 2.0, -1.0});
  EXPECT_NEAR(reference_log_partition(rsb, var, x, 40), 0.4 * 4 * 0.3 / 2 + 0.8 * 0.7 / 2, 1e-12);
}

TEST(MuQuadrature, UnitObservableAndBothForms) {
  const RSBParams configs[] = {RSBParams({0.5}, {0.4}), RSBParams({0.4, 0.95}, {0.3, 0.7})};
  for (const auto& rsb : configs) {
    for (int r = 1; r <= rsb.k(); ++r) {
      for (double t : {0.0, 0.5}) {
        const auto one = mu_r_quadrature(1, MixtureFunction::sk(0.5), rsb, 0.3, t, r,
                                         ReplicaObservable::kOne, {16, false});
        EXPECT_NEAR(one.w_form, 1.0, 1e-8);
        EXPECT_NEAR(one.normalization, 1.0, 1e-8);
        EXPECT_LE(one.max_factor_gap, 1e-8);
        const auto d = mu_r_quadrature(1, MixtureFunction::sk(0.5), rsb, 0.3, t, r,
                                       ReplicaObservable::kDelta, {16, false});
        EXPECT_NEAR(d.w_form, d.v_form, 1e-8);
        EXPECT_GE(d.w_form, -1e-12);
      }
    }
  }
}

TEST(MuQuadrature, ProductMeasureWhenNoDisorder) {
  // beta = 0: every copy is an independent spin in field h, so <R> = tanh(h)^2.
  const auto zero = make_mixture({{2, 0.0}});
  const auto r = mu_r_quadrature(1, zero, RSBParams({0.5}, {0.4}), 0.4, 0.5, 1,
                                 ReplicaObservable::kOverlap, {8, false});
  EXPECT_NEAR(r.w_form, std::pow(std::tanh(0.4), 2), 1e-12);
}

TEST(MuQuadrature, RejectsOversizedProblems) {
  const RSBParams rsb({0.5}, {0.4});
  const auto mix = MixtureFunction::sk(0.5);
  EXPECT_THROW(mu_r_quadrature(3, mix, rsb, 0.0, 0.5, 1, ReplicaObservable::kOne), std::invalid_argument);
  EXPECT_THROW(mu_r_quadrature(1, mix, rsb, 0.0, 0.5, 2, ReplicaObservable::kOne), std::invalid_argument);
  EXPECT_THROW(mu_r_quadrature(1, mix, rsb, 0.0, 1.5, 1, ReplicaObservable::kOne), std::invalid_argument);
}

}  // namespace
}  // namespace rsb
