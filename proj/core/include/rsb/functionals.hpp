#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace rsb {

// Leaf functionals of a marked cascade. A leaf alpha carries the marks along
// its path, z = (z_0, z_1, ..., z_k), where z_0 is a root mark shared by every
// leaf and z_l sits on the level-l ancestor alpha^l. The menu is closed so
// that every identity has a quadrature-computable reference side.

enum class PathKind { kConstant, kLinear, kQuadratic, kLogCosh };

class PathFunctional {
 public:
  /// X = c.
  static PathFunctional constant(double c);
  /// X = c0 + sum_l coeffs[l] z_l. Missing coefficients count as zero.
  static PathFunctional linear(std::vector<double> coeffs, double c0 = 0.0);
  /// X = c0 + sum_l coeffs[l] z_l + curvature * (sum_l z_l)^2.
  static PathFunctional quadratic(std::vector<double> coeffs, double curvature,
                                  double c0 = 0.0);
  /// X = log 2 cosh(shift + sum_l z_l), the per-site log-partition of a
  /// spin in the summed field.
  static PathFunctional log_cosh(double shift);

  double operator()(std::span<const double> marks) const;

  PathKind kind() const { return kind_; }
  std::string describe() const;

 private:
  PathKind kind_ = PathKind::kConstant;
  std::vector<double> coeffs_;
  double c0_ = 0.0;
  double curvature_ = 0.0;
  double shift_ = 0.0;
};

enum class PairKind { kProduct, kLevelMarkProduct };

/// Two-path functional Y(z^alpha, z^beta), always separable:
///   Y = sum_j left_j(z^alpha) * right_j(z^beta).
class PairFunctional {
 public:
  /// Y = y(alpha) y(beta).
  static PairFunctional product(PathFunctional y);
  /// Y = sum_l weights[l] z^alpha_l z^beta_l.
  static PairFunctional level_mark_product(std::vector<double> weights);

  double operator()(std::span<const double> a, std::span<const double> b) const;

  std::size_t term_count() const;
  double left(std::size_t term, std::span<const double> marks) const;
  double right(std::size_t term, std::span<const double> marks) const;

  PairKind kind() const { return kind_; }
  std::string describe() const;

 private:
  PairKind kind_ = PairKind::kProduct;
  PathFunctional y_ = PathFunctional::constant(1.0);
  std::vector<double> weights_;
};

/// Numerically stable log(2 cosh x).
inline double log_2cosh(double x) {
  const double a = x < 0 ? -x : x;
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace rsb
