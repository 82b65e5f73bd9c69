#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rsb/recursion.hpp"

namespace rsb {
namespace {

double lse_mean(std::span<const double> w, std::span<const double> v,
                double m) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, m * x);
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += w[j] * std::exp(m * v[j] - top);
  return (top + std::log(s)) / m;
}

int spin(unsigned config, int site) { return (config >> site) & 1u ? -1 : 1; }

// Nested quadrature over the coupled pair. Column l < r is one N-vector
// shared by both copies; column l >= r is an independent N-vector per copy.
class CoupledQuadrature {
 public:
  CoupledQuadrature(int n_sites, const MixtureFunction& mix,
                    const RSBParams& rsb, double h, double t, int r,
                    ReplicaObservable f, int requested_nodes)
      : n_(n_sites), rsb_(rsb), h_(h), t_(t), r_(r) {
    const int k = rsb.k();
    configs_ = 1u << n_;
    const auto v = column_variances(mix, rsb);
    for (double x : v) sd_.push_back(std::sqrt(std::max(0.0, x)));

    // Hamiltonian coordinates: H = sum_j sqrt(lambda_j) g_j u_j over the
    // nonnegligible spectrum of the covariance N xi(R).
    if (t > 0.0) {
      Eigen::MatrixXd cov(configs_, configs_);
      for (unsigned a = 0; a < configs_; ++a) {
        for (unsigned b = 0; b < configs_; ++b) {
          cov(a, b) = n_ * mix.xi(overlap(a, b, n_).r12);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
      const double top = solver.eigenvalues().maxCoeff();
      for (int j = 0; j < static_cast<int>(configs_); ++j) {
        const double lambda = solver.eigenvalues()(j);
        if (top > 0.0 && lambda > 1e-12 * top) {
          std::vector<double> dir(configs_);
          for (unsigned a = 0; a < configs_; ++a) {
            dir[a] = std::sqrt(lambda) * solver.eigenvectors()(a, j);
          }
          h_dirs_.push_back(std::move(dir));
        }
      }
    }

    dims_ = static_cast<int>(h_dirs_.size());
    for (int l = 0; l <= k; ++l) dims_ += column_width(l);
    nodes_ = tensor_nodes(requested_nodes, dims_);
    rule_ = &gauss_hermite(nodes_);

    f_table_.resize(static_cast<std::size_t>(configs_) * configs_);
    for (unsigned a = 0; a < configs_; ++a) {
      for (unsigned b = 0; b < configs_; ++b) {
        const double R = overlap(a, b, n_).r12;
        double val = 1.0;
        if (f == ReplicaObservable::kOverlap) val = R;
        if (f == ReplicaObservable::kDelta) val = delta(mix, R, rsb.q(r));
        f_table_[a * configs_ + b] = val;
      }
    }
    hamiltonian_.assign(configs_, 0.0);
    field_[0].assign(static_cast<std::size_t>(n_), 0.0);
    field_[1].assign(static_cast<std::size_t>(n_), 0.0);
  }

  MuQuadratureResult run() {
    MuQuadratureResult res;
    res.nodes = nodes_;
    res.dims = dims_;
    const int hd = static_cast<int>(h_dirs_.size());
    const std::size_t count = power(hd);
    const auto nodes = rule_->nodes();
    const auto w = rule_->weights();
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::fill(hamiltonian_.begin(), hamiltonian_.end(), 0.0);
      double weight = 1.0;
      std::size_t rest = idx;
      for (int j = 0; j < hd; ++j) {
        const std::size_t digit = rest % static_cast<std::size_t>(nodes_);
        rest /= static_cast<std::size_t>(nodes_);
        weight *= w[digit];
        for (unsigned a = 0; a < configs_; ++a) {
          hamiltonian_[a] += nodes[digit] * h_dirs_[static_cast<std::size_t>(j)][a];
        }
      }
      const Out o = level(0);
      res.w_form += weight * o.wf;
      res.v_form += weight * o.vf;
      res.normalization += weight * o.w1;
    }
    res.max_factor_gap = gap_;
    return res;
  }

 private:
  struct Out {
    double x1 = 0.0, x2 = 0.0, y = 0.0;
    double wf = 0.0, vf = 0.0, w1 = 0.0;
  };

  int column_width(int l) const { return l < r_ ? n_ : 2 * n_; }

  std::size_t power(int d) const {
    std::size_t c = 1;
    for (int j = 0; j < d; ++j) c *= static_cast<std::size_t>(nodes_);
    return c;
  }

  Out leaf() {
    const double st = std::sqrt(t_);
    const double sf = std::sqrt(1.0 - t_);
    double energy[2][16];
    double x[2];
    for (int c = 0; c < 2; ++c) {
      double top = -std::numeric_limits<double>::infinity();
      for (unsigned a = 0; a < configs_; ++a) {
        double e = st * hamiltonian_[a];
        for (int i = 0; i < n_; ++i) {
          e += (sf * field_[c][static_cast<std::size_t>(i)] + h_) * spin(a, i);
        }
        energy[c][a] = e;
        top = std::max(top, e);
      }
      double s = 0.0;
      for (unsigned a = 0; a < configs_; ++a) {
        energy[c][a] = std::exp(energy[c][a] - top);
        s += energy[c][a];
      }
      for (unsigned a = 0; a < configs_; ++a) energy[c][a] /= s;
      x[c] = top + std::log(s);
    }
    double avg = 0.0;
    for (unsigned a = 0; a < configs_; ++a) {
      for (unsigned b = 0; b < configs_; ++b) {
        avg += f_table_[a * configs_ + b] * energy[0][a] * energy[1][b];
      }
    }
    return {x[0], x[1], x[0] + x[1], avg, avg, 1.0};
  }

  // Integrates column l given columns < l; returns X^c_{l-1}, Y_{l-1} and
  // the tilted averages over columns >= l.
  Out level(int l) {
    const int k = rsb_.k();
    if (l == k + 1) return leaf();
    const int width = column_width(l);
    const std::size_t count = power(width);
    const auto nodes = rule_->nodes();
    const auto w = rule_->weights();
    const double sd = sd_[static_cast<std::size_t>(l)];

    std::vector<Out> kids(count);
    std::vector<double> weights(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      double add[2][2] = {{0, 0}, {0, 0}};
      double weight = 1.0;
      std::size_t rest = idx;
      for (int c = 0; c < (l < r_ ? 1 : 2); ++c) {
        for (int i = 0; i < n_; ++i) {
          const std::size_t digit = rest % static_cast<std::size_t>(nodes_);
          rest /= static_cast<std::size_t>(nodes_);
          weight *= w[digit];
          add[c][i] = sd * nodes[digit];
        }
      }
      if (l < r_) {
        for (int i = 0; i < n_; ++i) add[1][i] = add[0][i];
      }
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < n_; ++i) field_[c][static_cast<std::size_t>(i)] += add[c][i];
      }
      kids[idx] = level(l + 1);
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < n_; ++i) field_[c][static_cast<std::size_t>(i)] -= add[c][i];
      }
      weights[idx] = weight;
    }

    Out out;
    if (l == 0) {
      for (std::size_t j = 0; j < count; ++j) {
        out.wf += weights[j] * kids[j].wf;
        out.vf += weights[j] * kids[j].vf;
        out.w1 += weights[j] * kids[j].w1;
      }
      return out;
    }

    const double m = rsb_.m(l);
    const double n_exp = l < r_ ? 0.5 * m : m;
    std::vector<double> x1(count), x2(count), y(count);
    for (std::size_t j = 0; j < count; ++j) {
      x1[j] = kids[j].x1;
      x2[j] = kids[j].x2;
      y[j] = kids[j].y;
    }
    out.x1 = lse_mean(weights, x1, m);
    out.x2 = lse_mean(weights, x2, m);
    out.y = lse_mean(weights, y, n_exp);
    for (std::size_t j = 0; j < count; ++j) {
      const double w1 = std::exp(m * (x1[j] - out.x1));
      const double w2 = std::exp(m * (x2[j] - out.x2));
      const double factor = l < r_ ? w1 : w1 * w2;
      const double v = std::exp(n_exp * (y[j] - out.y));
      gap_ = std::max(gap_, std::abs(v - factor));
      out.wf += weights[j] * factor * kids[j].wf;
      out.vf += weights[j] * v * kids[j].vf;
      out.w1 += weights[j] * factor * kids[j].w1;
    }
    return out;
  }

  int n_;
  const RSBParams& rsb_;
  double h_, t_;
  int r_;
  unsigned configs_ = 0;
  std::vector<double> sd_;
  std::vector<std::vector<double>> h_dirs_;
  int dims_ = 0;
  int nodes_ = 0;
  const GaussHermiteRule* rule_ = nullptr;
  std::vector<double> f_table_;
  std::vector<double> hamiltonian_;
  std::vector<double> field_[2];
  double gap_ = 0.0;
};

}  // namespace

MuQuadratureResult mu_r_quadrature(int n_sites, const MixtureFunction& mix,
                                   const RSBParams& rsb, double h, double t,
                                   int r, ReplicaObservable f,
                                   const QuadratureSpec& quad) {
  if (n_sites < 1 || n_sites > 2) {
    throw std::invalid_argument("mu_r_quadrature supports N = 1 or 2");
  }
  if (rsb.k() > 2) throw std::invalid_argument("mu_r_quadrature supports k <= 2");
  if (r < 1 || r > rsb.k()) throw std::invalid_argument("r must lie in 1..k");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");
  quad.validate();
  CoupledQuadrature q(n_sites, mix, rsb, h, t, r, f, quad.nodes_per_level);
  return q.run();
}

}  // namespace rsb
