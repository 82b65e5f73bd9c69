#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rsb {

struct NelderMeadOptions {
  int max_iterations = 4000;
  /// Stop when the spread of simplex values falls below this.
  double f_tolerance = 1e-12;
  /// ... and the simplex diameter falls below this.
  double x_tolerance = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free minimization with the standard reflection / expansion /
/// contraction / shrink coefficients (1, 2, 1/2, 1/2). Non-finite objective
/// values are treated as +inf.
NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& objective,
    std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace rsb
