#include "rsb/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rsb {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// probabilists' Hermite recurrence (off-diagonal sqrt(j)); weights are the
// squared first components of the normalized eigenvectors.
GaussHermiteRule::GaussHermiteRule(int n) {
  if (n < 1) throw std::invalid_argument("GaussHermiteRule: n must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int j = 1; j < n; ++j) {
    jacobi(j, j - 1) = jacobi(j - 1, j) = std::sqrt(static_cast<double>(j));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("GaussHermiteRule: eigen decomposition failed");
  }
  nodes_.resize(n);
  weights_.resize(n);
  for (int j = 0; j < n; ++j) {
    nodes_[j] = solver.eigenvalues()(j);
    const double v0 = solver.eigenvectors()(0, j);
    weights_[j] = v0 * v0;
  }
  // Symmetrize: the rule is exactly symmetric, the solver only nearly so.
  for (int j = 0; j < n / 2; ++j) {
    const int i = n - 1 - j;
    const double x = 0.5 * (nodes_[i] - nodes_[j]);
    const double w = 0.5 * (weights_[i] + weights_[j]);
    nodes_[j] = -x;
    nodes_[i] = x;
    weights_[j] = weights_[i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;
}

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(n);
  return *slot;
}

}  // namespace rsb
