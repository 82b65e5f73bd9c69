#include "rsb/recursion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsb {

void QuadratureSpec::validate() const {
  if (nodes_per_level < 8) {
    throw std::invalid_argument("quadrature needs at least 8 nodes per level");
  }
}

int tensor_nodes(int requested, int dims) {
  if (dims <= 0) return requested;
  int n = requested;
  while (n >= 8 && std::pow(static_cast<double>(n), dims) > kMaxTensorPoints) {
    --n;
  }
  if (n < 8) {
    throw std::domain_error("tensor quadrature over " + std::to_string(dims) +
                            " dimensions exceeds the point budget");
  }
  return n;
}

namespace {

// (1/m) log sum_j w_j exp(m v_j), with the m = 0 limit sum_j w_j v_j.
double soft_mean(std::span<const double> w, std::span<const double> v,
                 double m) {
  if (m == 0.0) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += w[j] * v[j];
    return s;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, m * x);
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    s += w[j] * std::exp(m * v[j] - top);
  }
  return (top + std::log(s)) / m;
}

void require_m_range(double m) {
  if (!(m >= 0.0 && m <= 1.0)) {
    throw std::invalid_argument("smoothing exponent m must lie in [0, 1]");
  }
}

}  // namespace

ScalarFunction smoothing_step(ScalarFunction g, double m, double variance,
                              const GaussHermiteRule& rule) {
  require_m_range(m);
  if (!(variance >= 0.0)) {
    throw std::invalid_argument("smoothing variance must be >= 0");
  }
  if (variance == 0.0) return g;
  const double sd = std::sqrt(variance);
  return [g = std::move(g), m, sd, &rule](double x) {
    const auto nodes = rule.nodes();
    std::vector<double> v(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) v[j] = g(x + sd * nodes[j]);
    return soft_mean(rule.weights(), v, m);
  };
}

std::vector<double> tabulate(const ScalarFunction& g,
                             std::span<const double> grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(g(x));
  return out;
}

std::vector<double> column_variances(const MixtureFunction& mix,
                                     const RSBParams& rsb) {
  const int k = rsb.k();
  std::vector<double> v(static_cast<std::size_t>(k) + 1);
  v[0] = mix.xi_prime(rsb.q(1));
  for (int l = 1; l <= k; ++l) {
    v[static_cast<std::size_t>(l)] =
        mix.xi_prime(rsb.q(l + 1)) - mix.xi_prime(rsb.q(l));
  }
  return v;
}

namespace {

// Direct nested evaluation of g_1 and the outer expectation, without
// building closures; identical arithmetic to the smoothing_step chain.
class PhiEvaluator {
 public:
  PhiEvaluator(const RSBParams& rsb, const MixtureFunction& mix, double h,
               int nodes)
      : rsb_(rsb), h_(h), rule_(gauss_hermite(nodes)) {
    const auto v = column_variances(mix, rsb);
    for (double x : v) sd_.push_back(std::sqrt(std::max(0.0, x)));
    buffers_.resize(sd_.size(),
                    std::vector<double>(static_cast<std::size_t>(nodes)));
  }

  // g_l(x) for l in [1, k+1].
  double level(int l, double x) {
    const int k = rsb_.k();
    if (l == k + 1) return log_2cosh(x + h_);
    const double sd = sd_[static_cast<std::size_t>(l)];
    if (sd == 0.0) return level(l + 1, x);
    auto& buf = buffers_[static_cast<std::size_t>(l)];
    const auto nodes = rule_.nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      buf[j] = level(l + 1, x + sd * nodes[j]);
    }
    return soft_mean(rule_.weights(), buf, rsb_.m(l));
  }

  double phi0() {
    const double sd = sd_[0];
    if (sd == 0.0) return level(1, 0.0);
    double s = 0.0;
    const auto nodes = rule_.nodes();
    const auto w = rule_.weights();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      s += w[j] * level(1, sd * nodes[j]);
    }
    return s;
  }

 private:
  const RSBParams& rsb_;
  double h_;
  const GaussHermiteRule& rule_;
  std::vector<double> sd_;
  std::vector<std::vector<double>> buffers_;
};

double bound_from_phi(double phi, const RSBParams& rsb,
                      const MixtureFunction& mix) {
  double b = phi - 0.5 * theta(mix, 1.0);
  for (int r = 1; r <= rsb.k(); ++r) {
    b += 0.5 * (rsb.m(r) - rsb.m(r - 1)) * theta(mix, rsb.q(r));
  }
  return b;
}

}  // namespace

double phi0_value(const RSBParams& rsb, const MixtureFunction& mix, double h,
                  int nodes) {
  if (nodes < 1) throw std::invalid_argument("quadrature nodes must be >= 1");
  PhiEvaluator eval(rsb, mix, h, nodes);
  return eval.phi0();
}

RecursionResult phi0(const RSBParams& rsb, const MixtureFunction& mix,
                     double h, const QuadratureSpec& quad) {
  quad.validate();
  const int dims = rsb.k() + 1;
  const int n = quad.nodes_per_level;
  if (std::pow(static_cast<double>(quad.convergence_check ? 2 * n : n), dims) >
      kMaxTensorPoints) {
    throw std::domain_error("phi0: tensor quadrature exceeds the point budget");
  }
  RecursionResult res;
  res.variances = column_variances(mix, rsb);
  for (double v : res.variances) {
    if (v < 0.0) throw std::domain_error("phi0: negative column variance");
  }
  res.quad_nodes = n;
  res.phi0 = phi0_value(rsb, mix, h, n);
  if (quad.convergence_check) {
    res.refinement_change = std::abs(phi0_value(rsb, mix, h, 2 * n) - res.phi0);
    res.converged = res.refinement_change < 1e-7;
  }

  const GaussHermiteRule& rule = gauss_hermite(n);
  for (int i = 0; i <= 40; ++i) res.grid.push_back(-4.0 + 0.2 * i);
  const int k = rsb.k();
  std::vector<ScalarFunction> g(static_cast<std::size_t>(k) + 2);
  g[static_cast<std::size_t>(k) + 1] = [h](double x) {
    return log_2cosh(x + h);
  };
  for (int l = k; l >= 1; --l) {
    g[static_cast<std::size_t>(l)] =
        smoothing_step(g[static_cast<std::size_t>(l) + 1], rsb.m(l),
                       res.variances[static_cast<std::size_t>(l)], rule);
  }
  for (int l = 1; l <= k + 1; ++l) {
    res.level_functions.push_back(
        tabulate(g[static_cast<std::size_t>(l)], res.grid));
  }
  return res;
}

namespace {

void require_endpoint(const RSBParams& rsb) {
  if (!rsb.guerra_endpoint()) {
    throw std::invalid_argument("the bound requires m_k = 1");
  }
}

}  // namespace

double guerra_bound_value(const RSBParams& rsb, const MixtureFunction& mix,
                          double h, int nodes) {
  require_endpoint(rsb);
  return bound_from_phi(phi0_value(rsb, mix, h, nodes), rsb, mix);
}

BoundResult guerra_bound(const RSBParams& rsb, const MixtureFunction& mix,
                         double h, const QuadratureSpec& quad) {
  require_endpoint(rsb);
  quad.validate();
  BoundResult out;
  out.quad_nodes = quad.nodes_per_level;
  out.phi0 = phi0_value(rsb, mix, h, quad.nodes_per_level);
  out.bound = bound_from_phi(out.phi0, rsb, mix);
  if (quad.convergence_check) {
    const double refined =
        phi0_value(rsb, mix, h, 2 * quad.nodes_per_level);
    out.refinement_change = std::abs(refined - out.phi0);
    out.converged = out.refinement_change < 1e-7;
  }
  return out;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

RSBParams decode_bound_parameters(std::span<const double> x, int k) {
  if (k < 1 || x.size() != static_cast<std::size_t>(2 * k - 1)) {
    throw std::invalid_argument("decode_bound_parameters: wrong dimension");
  }
  std::vector<double> m, q;
  for (int j = 0; j < k - 1; ++j) m.push_back(logistic(x[static_cast<std::size_t>(j)]));
  std::sort(m.begin(), m.end());
  m.push_back(1.0);
  for (int j = k - 1; j < 2 * k - 1; ++j) {
    q.push_back(logistic(x[static_cast<std::size_t>(j)]));
  }
  std::sort(q.begin(), q.end());
  return RSBParams(std::move(m), std::move(q));
}

OptimizeResult optimize_bound(const MixtureFunction& mix, double h, int k,
                              const QuadratureSpec& quad,
                              const OptimizerConfig& config) {
  if (k < 1 || k > 3) throw std::invalid_argument("optimize_bound needs 1 <= k <= 3");
  if (config.restarts < 1 || config.restarts > 5) {
    throw std::invalid_argument("optimize_bound needs 1 to 5 restarts");
  }
  quad.validate();
  const int nodes = quad.nodes_per_level;
  if (std::pow(static_cast<double>(nodes), k + 1) > kMaxTensorPoints) {
    throw std::domain_error("optimize_bound: quadrature exceeds the budget");
  }

  auto objective = [&](std::span<const double> x) {
    try {
      return guerra_bound_value(decode_bound_parameters(x, k), mix, h, nodes);
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  static constexpr std::array<double, 5> kScale = {0.1, 0.3, 0.5, 0.7, 0.9};
  static constexpr std::array<double, 5> kBreak = {0.3, 0.45, 0.6, 0.75, 0.9};

  OptimizeResult out;
  std::vector<double> best_x;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < config.restarts; ++i) {
    std::vector<double> start;
    for (int j = 1; j < k; ++j) {
      start.push_back(logit(kBreak[static_cast<std::size_t>(i)] * j / k));
    }
    for (int j = 1; j <= k; ++j) {
      start.push_back(logit(std::pow(kScale[static_cast<std::size_t>(i)],
                                     static_cast<double>(k + 1 - j) / k)));
    }
    const NelderMeadResult r = nelder_mead(objective, start, config.nelder_mead);
    out.evaluations += r.evaluations;
    out.restart_values.push_back(r.value);
    if (r.value < best) {
      best = r.value;
      best_x = r.x;
      out.converged = r.converged;
    }
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("optimize_bound: no admissible parameters found");
  }
  out.params = decode_bound_parameters(best_x, k);
  out.bound = best;
  return out;
}

// ---- references for marked cascades ------------------------------------

namespace {

class PathTree {
 public:
  PathTree(const RSBParams& rsb, std::span<const double> variances, int nodes)
      : rsb_(rsb) {
    const int k = rsb.k();
    if (variances.size() != static_cast<std::size_t>(k) + 1) {
      throw std::invalid_argument("need one mark variance per level 0..k");
    }
    for (double v : variances) {
      if (!(v >= 0.0)) throw std::invalid_argument("mark variance must be >= 0");
      sd_.push_back(std::sqrt(v));
    }
    rule_ = &gauss_hermite(tensor_nodes(nodes, k + 1));
    z_.assign(static_cast<std::size_t>(k) + 1, 0.0);
  }

  struct Value {
    double x = 0.0;
    std::vector<double> f;
  };

  using Leaf = std::function<Value(std::span<const double>)>;

  // Given z_0..z_d, integrates levels d+1..k: returns X_d and
  // E[prod_{l>d} W_l F_j | z_0..z_d] for the leaf functionals.
  Value subtree(int d, const Leaf& leaf) {
    const int k = rsb_.k();
    if (d == k) return leaf(z_);
    const int l = d + 1;
    const auto nodes = rule_->nodes();
    const auto w = rule_->weights();
    std::vector<Value> kids;
    kids.reserve(nodes.size());
    std::vector<double> xs;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      z_[static_cast<std::size_t>(l)] = sd_[static_cast<std::size_t>(l)] * nodes[j];
      kids.push_back(subtree(l, leaf));
      xs.push_back(kids.back().x);
    }
    const double m = rsb_.m(l);
    Value out;
    out.x = soft_mean(w, xs, m);
    out.f.assign(kids.front().f.size(), 0.0);
    for (std::size_t j = 0; j < kids.size(); ++j) {
      const double weight = w[j] * std::exp(m * (kids[j].x - out.x));
      for (std::size_t i = 0; i < out.f.size(); ++i) {
        out.f[i] += weight * kids[j].f[i];
      }
    }
    return out;
  }

  // Plain expectation over z_0 of `at_root(z_0)`.
  template <class Fn>
  double root(Fn&& at_root) {
    const auto nodes = rule_->nodes();
    const auto w = rule_->weights();
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      z_[0] = sd_[0] * nodes[j];
      s += w[j] * at_root();
    }
    return s;
  }

  const RSBParams& rsb() const { return rsb_; }
  std::vector<double>& marks() { return z_; }
  const GaussHermiteRule& rule() const { return *rule_; }
  double sd(int l) const { return sd_[static_cast<std::size_t>(l)]; }

 private:
  const RSBParams& rsb_;
  std::vector<double> sd_;
  const GaussHermiteRule* rule_ = nullptr;
  std::vector<double> z_;
};

}  // namespace

double reference_log_partition(const RSBParams& rsb,
                               std::span<const double> mark_variances,
                               const PathFunctional& x, int nodes) {
  PathTree tree(rsb, mark_variances, nodes);
  const PathTree::Leaf leaf = [&](std::span<const double> z) {
    return PathTree::Value{x(z), {}};
  };
  return tree.root([&] { return tree.subtree(0, leaf).x; });
}

double reference_tilted(const RSBParams& rsb,
                        std::span<const double> mark_variances,
                        const PathFunctional& x, const PathFunctional& y,
                        int nodes) {
  PathTree tree(rsb, mark_variances, nodes);
  const PathTree::Leaf leaf = [&](std::span<const double> z) {
    return PathTree::Value{x(z), {y(z)}};
  };
  return tree.root([&] { return tree.subtree(0, leaf).f[0]; });
}

double reference_restricted(const RSBParams& rsb,
                            std::span<const double> mark_variances,
                            const PathFunctional& x, const PairFunctional& y,
                            int r, int nodes) {
  if (r < 1 || r > rsb.k()) {
    throw std::invalid_argument("restricted level r must lie in 1..k");
  }
  PathTree tree(rsb, mark_variances, nodes);
  const std::size_t terms = y.term_count();
  const PathTree::Leaf leaf = [&](std::span<const double> z) {
    PathTree::Value v{x(z), {}};
    v.f.reserve(2 * terms);
    for (std::size_t j = 0; j < terms; ++j) v.f.push_back(y.left(j, z));
    for (std::size_t j = 0; j < terms; ++j) v.f.push_back(y.right(j, z));
    return v;
  };

  // Shared levels 1..r-1 carry a single tilt; at depth r-1 the two copies
  // separate and their tilted averages multiply term by term.
  std::function<PathTree::Value(int)> shared = [&](int d) -> PathTree::Value {
    if (d == r - 1) {
      PathTree::Value v = tree.subtree(d, leaf);
      double g = 0.0;
      for (std::size_t j = 0; j < terms; ++j) g += v.f[j] * v.f[terms + j];
      return {v.x, {g}};
    }
    const int l = d + 1;
    const auto nodes_l = tree.rule().nodes();
    const auto w = tree.rule().weights();
    std::vector<PathTree::Value> kids;
    std::vector<double> xs;
    for (std::size_t j = 0; j < nodes_l.size(); ++j) {
      tree.marks()[static_cast<std::size_t>(l)] = tree.sd(l) * nodes_l[j];
      kids.push_back(shared(l));
      xs.push_back(kids.back().x);
    }
    const double m = rsb.m(l);
    PathTree::Value out{soft_mean(w, xs, m), {0.0}};
    for (std::size_t j = 0; j < kids.size(); ++j) {
      out.f[0] += w[j] * std::exp(m * (kids[j].x - out.x)) * kids[j].f[0];
    }
    return out;
  };
  return tree.root([&] { return shared(0).f[0]; });
}

}  // namespace rsb
