#pragma once

#include <span>
#include <vector>

namespace rsb {

/// Gauss-Hermite rule for the standard normal weight:
///   E f(Z) ~ sum_j weights[j] f(nodes[j]),  Z ~ N(0, 1).
/// Exact for polynomials of degree < 2n. Weights sum to one.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// E f(mean + sd Z).
  template <class F>
  double expect(F&& f, double sd = 1.0, double mean = 0.0) const {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      s += weights_[j] * f(mean + sd * nodes_[j]);
    }
    return s;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared, lazily built rule of size n. The reference stays valid for the
/// life of the process.
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace rsb
