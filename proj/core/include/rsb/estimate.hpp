#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace rsb {

/// Monte Carlo result: sample mean over independent replicas and the standard
/// error sd / sqrt(replicas).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

/// Requires at least two samples. Sums in index order.
Estimate summarize(std::span<const double> samples);

/// An exactly known value, carried as an Estimate with zero error.
Estimate exact(double value);

/// Outcome of comparing two quantities under the shared tolerance rule
///   |lhs - rhs| <= multiplier * sqrt(lhs_se^2 + rhs_se^2) + allowance
/// or, for one-sided checks,
///   lhs - rhs <= multiplier * sqrt(lhs_se^2 + rhs_se^2) + allowance.
/// Non-finite gaps or tolerances fail.
struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double allowance = 0.0;
  double tolerance = 0.0;
  bool one_sided = false;
  bool pass = false;
};

inline constexpr double kDefaultToleranceMultiplier = 3.0;

CheckRecord check_equal(std::string name, const Estimate& lhs,
                        const Estimate& rhs,
                        double multiplier = kDefaultToleranceMultiplier,
                        double allowance = 0.0);

/// Passes when lhs does not exceed rhs beyond the tolerance.
CheckRecord check_at_most(std::string name, const Estimate& lhs,
                          const Estimate& rhs,
                          double multiplier = kDefaultToleranceMultiplier,
                          double allowance = 0.0);

}  // namespace rsb
