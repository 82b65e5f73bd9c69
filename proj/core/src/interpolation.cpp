#include "rsb/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsb/parallel.hpp"
#include "rsb/random.hpp"

namespace rsb {
namespace {

int spin(unsigned config, int site) { return (config >> site) & 1u ? -1 : 1; }

double log_sum_exp(std::span<const double> x) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : x) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

// z_0 + sum of columns along the path, for every node at depths 0..k.
std::vector<std::vector<double>> prefix_fields(const CascadeFields& fields) {
  const int k = fields.k();
  const auto n = static_cast<std::size_t>(fields.n_sites());
  const auto b = static_cast<std::size_t>(fields.branching());
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k) + 1);
  out[0] = fields.column(0, 0);
  std::size_t count = 1;
  for (int d = 1; d <= k; ++d) {
    count *= b;
    auto& level = out[static_cast<std::size_t>(d)];
    const auto& above = out[static_cast<std::size_t>(d) - 1];
    level.resize(count * n);
    for (std::size_t node = 0; node < count; ++node) {
      const auto z = fields.column(d, node);
      for (std::size_t i = 0; i < n; ++i) {
        level[node * n + i] = above[(node / b) * n + i] + z[i];
      }
    }
  }
  return out;
}

// sqrt(t) H(sigma) + h sum_i sigma_i.
std::vector<double> base_energy(const HamiltonianTable& table, double t,
                                double h) {
  const int n = table.n_sites();
  const unsigned configs = 1u << n;
  std::vector<double> e(configs);
  const double st = std::sqrt(t);
  for (unsigned a = 0; a < configs; ++a) {
    e[a] = st * table[a] + h * magnetization(a, n);
  }
  return e;
}

// base + sqrt(1-t) s . sigma for every configuration.
void row_energy(std::span<const double> base, std::span<const double> field,
                double scale, int n, std::span<double> out) {
  for (std::size_t a = 0; a < base.size(); ++a) {
    double e = base[a];
    for (int i = 0; i < n; ++i) {
      e += scale * field[static_cast<std::size_t>(i)] * spin(static_cast<unsigned>(a), i);
    }
    out[a] = e;
  }
}

// out[popcount(s1 ^ s2)] += scale * a[s1] * b[s2].
void accumulate_pairs(std::span<const double> a, std::span<const double> b,
                      double scale, std::span<double> out) {
  for (std::size_t s1 = 0; s1 < a.size(); ++s1) {
    if (a[s1] == 0.0) continue;
    for (std::size_t s2 = 0; s2 < b.size(); ++s2) {
      out[static_cast<std::size_t>(
          __builtin_popcountll(static_cast<unsigned long long>(s1 ^ s2)))] +=
          scale * a[s1] * b[s2];
    }
  }
}

double overlap_value(int j, int n) { return 1.0 - 2.0 * j / static_cast<double>(n); }

double leaf_variance(const MixtureFunction& mix, const RSBParams& rsb) {
  return column_variances(mix, rsb).back();
}

double pd_target(const RSBParams& rsb, int r) {
  return r == rsb.k() + 1 ? 1.0 - rsb.m(rsb.k()) : rsb.m(r) - rsb.m(r - 1);
}

}  // namespace

void validate_system(const SystemConfig& config) {
  if (config.n_sites < 1 || config.n_sites > 8) {
    throw std::invalid_argument("interpolation needs 1 <= N <= 8");
  }
  config.rsb.require_simulable();
  const double leaves = std::pow(static_cast<double>(config.branching),
                                 config.rsb.k());
  if (config.branching < 2 || leaves > 1e4) {
    throw std::invalid_argument("interpolation needs b >= 2 and b^k <= 10^4");
  }
  if (std::ldexp(leaves, config.n_sites) > 2.5e6) {
    throw std::invalid_argument("interpolation needs 2^N b^k <= 2.5e6");
  }
  if (!std::isfinite(config.h)) throw std::invalid_argument("h must be finite");
}

double GibbsSystem::total_probability() const {
  double s = 0.0;
  for (double p : probabilities_) s += p;
  return s;
}

std::vector<std::vector<double>> GibbsSystem::pair_distribution() const {
  const int k = cascade_.k();
  const auto b = static_cast<std::size_t>(cascade_.branching());
  const std::size_t configs = this->configs();
  const std::size_t classes = static_cast<std::size_t>(n_) + 1;
  const std::span<const double> gamma = probabilities_;

  // same[d][j]: sum over nodes at depth d of the pair masses of the node's
  // aggregated row vector; leaf level without remainders.
  std::vector<std::vector<double>> same(static_cast<std::size_t>(k) + 1,
                                        std::vector<double>(classes, 0.0));
  std::vector<double> self_pairs(classes, 0.0), cross_pairs(classes, 0.0);

  std::vector<double> level(gamma.begin(),
                            gamma.begin() + static_cast<std::ptrdiff_t>(leaf_rows() * configs));
  for (std::size_t row = 0; row < leaf_rows(); ++row) {
    const auto a = std::span<const double>(level).subspan(row * configs, configs);
    accumulate_pairs(a, a, 1.0, same[static_cast<std::size_t>(k)]);
  }
  for (int d = k - 1; d >= 0; --d) {
    const std::size_t count = cascade_.nodes_at(d);
    std::vector<double> up(count * configs, 0.0);
    for (std::size_t child = 0; child < count * b; ++child) {
      for (std::size_t s = 0; s < configs; ++s) {
        up[(child / b) * configs + s] += level[child * configs + s];
      }
    }
    if (d == k - 1 && rows() > leaf_rows()) {
      for (std::size_t parent = 0; parent < count; ++parent) {
        const auto rem = gamma.subspan((leaf_rows() + parent) * configs, configs);
        for (std::size_t s = 0; s < configs; ++s) up[parent * configs + s] += rem[s];
        const double ratio = tail_ratio_[parent];
        accumulate_pairs(rem, rem, ratio, cross_pairs);
        for (std::size_t s1 = 0; s1 < configs; ++s1) {
          for (std::size_t s2 = 0; s2 < configs; ++s2) {
            const int j = __builtin_popcountll(static_cast<unsigned long long>(s1 ^ s2));
            self_pairs[static_cast<std::size_t>(j)] +=
                ratio * rem[s1] * rem[s2] *
                std::exp(self_rate_ * overlap_value(j, n_));
          }
        }
      }
    }
    for (std::size_t node = 0; node < count; ++node) {
      const auto a = std::span<const double>(up).subspan(node * configs, configs);
      accumulate_pairs(a, a, 1.0, same[static_cast<std::size_t>(d)]);
    }
    level = std::move(up);
  }

  // Pairs meeting first at level r: same ancestor at depth r-1, different
  // nodes at depth r. Two distinct leaves inside one remainder meet at k;
  // one leaf paired with itself meets at k + 1.
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k) + 1,
                                       std::vector<double>(classes, 0.0));
  for (std::size_t j = 0; j < classes; ++j) {
    for (int r = 1; r <= k; ++r) {
      out[static_cast<std::size_t>(r) - 1][j] =
          same[static_cast<std::size_t>(r) - 1][j] - same[static_cast<std::size_t>(r)][j];
    }
    out[static_cast<std::size_t>(k) - 1][j] -= cross_pairs[j];
    out[static_cast<std::size_t>(k)][j] = same[static_cast<std::size_t>(k)][j] + self_pairs[j];
  }
  return out;
}

GibbsSystem build_system(const SystemConfig& config, double t,
                         std::uint64_t seed) {
  validate_system(config);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");
  const int n = config.n_sites;
  const int k = config.rsb.k();
  GibbsSystem sys(build_cascade(config.rsb, config.branching, seed, config.cascade),
                  sample_hamiltonian(n, config.mixture, seed));
  sys.n_ = n;
  sys.t_ = t;
  const Cascade& c = sys.cascade_;
  const CascadeFields fields(k, config.branching, config.mixture, config.rsb, n, seed);
  const auto prefix = prefix_fields(fields);
  const auto base = base_energy(sys.hamiltonian_, t, config.h);
  const std::size_t configs = sys.configs();
  const double scale = std::sqrt(1.0 - t);
  const double vk = leaf_variance(config.mixture, config.rsb);

  const std::size_t leaves = c.leaf_count();
  const std::size_t parents = c.has_remainder() ? c.tail_w().size() : 0;
  const std::size_t rows = leaves + parents;
  std::vector<double> log_weight(rows * configs);
  const auto nn = static_cast<std::size_t>(n);
  for (std::size_t row = 0; row < rows; ++row) {
    const bool leaf = row < leaves;
    const std::size_t node = leaf ? row : row - leaves;
    const auto& level = prefix[static_cast<std::size_t>(leaf ? k : k - 1)];
    const std::span<const double> field(level.data() + node * nn, nn);
    const auto out = std::span<double>(log_weight).subspan(row * configs, configs);
    row_energy(base, field, scale, n, out);
    const double w = leaf ? c.w()[node] : c.tail_w()[node];
    const double lw = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) +
                      (leaf ? 0.0 : 0.5 * (1.0 - t) * n * vk);
    for (double& e : out) e += lw;
  }
  sys.log_partition_ = log_sum_exp(log_weight);
  sys.probabilities_.resize(log_weight.size());
  for (std::size_t i = 0; i < log_weight.size(); ++i) {
    sys.probabilities_[i] = std::exp(log_weight[i] - sys.log_partition_);
  }
  sys.tail_ratio_.assign(parents, 0.0);
  for (std::size_t a = 0; a < parents; ++a) {
    const double d = c.tail_mass()[a];
    sys.tail_ratio_[a] = d > 0.0 ? c.tail_square_mass()[a] / (d * d) : 0.0;
  }
  sys.self_rate_ = (1.0 - t) * vk * n;
  return sys;
}

PhiEstimate phi_t(const SystemConfig& config, double t, std::size_t replicas,
                  std::uint64_t seed) {
  validate_system(config);
  if (replicas < 2) throw std::invalid_argument("phi_t needs >= 2 replicas");
  struct Sample {
    double phi = 0.0, allowance = 0.0;
  };
  const double vk = leaf_variance(config.mixture, config.rsb);
  const double factor = std::exp(0.5 * (1.0 - t) * config.n_sites * vk);
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const auto sys = build_system(config, t, replica_seed(seed, i));
    return Sample{sys.log_partition() / config.n_sites,
                  sys.cascade().truncation_allowance(factor) / config.n_sites};
  });
  std::vector<double> phi(replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    phi[i] = samples[i].phi;
    allowance += samples[i].allowance;
  }
  return {summarize(phi), allowance / static_cast<double>(replicas)};
}

DerivativeReport derivative_check(const SystemConfig& config, double t,
                                  double delta_t, std::size_t replicas,
                                  std::uint64_t seed, double multiplier) {
  validate_system(config);
  if (!(delta_t > 0.0 && t >= delta_t && t <= 1.0 - delta_t)) {
    throw std::invalid_argument("derivative check needs t in [delta, 1 - delta]");
  }
  if (replicas < 2) throw std::invalid_argument("derivative check needs >= 2 replicas");
  // The identity is exact for any finite set of weights, so the systems are
  // built without remainders; the check then isolates the t-discretization.
  SystemConfig cfg = config;
  cfg.cascade.leaf_remainder = false;
  const int n = cfg.n_sites;
  const int k = cfg.rsb.k();
  const MixtureFunction& mix = cfg.mixture;

  struct Sample {
    double numeric = 0.0, theta = 0.0, delta = 0.0;
  };
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const std::uint64_t rs = replica_seed(seed, i);
    const double lo = build_system(cfg, t - delta_t, rs).log_partition();
    const double hi = build_system(cfg, t + delta_t, rs).log_partition();
    const auto pairs = build_system(cfg, t, rs).pair_distribution();
    Sample s;
    s.numeric = (hi - lo) / (2.0 * delta_t * n);
    for (int r = 1; r <= k + 1; ++r) {
      const double q = cfg.rsb.q(r);
      const auto& row = pairs[static_cast<std::size_t>(r) - 1];
      for (int j = 0; j <= n; ++j) {
        const double mass = row[static_cast<std::size_t>(j)];
        s.theta += 0.5 * theta(mix, q) * mass;
        s.delta -= 0.5 * rsb::delta(mix, overlap_value(j, n), q) * mass;
      }
    }
    return s;
  });

  DerivativeReport rep;
  rep.t = t;
  rep.delta = delta_t;
  rep.theta_one = -0.5 * theta(mix, 1.0);
  std::vector<double> num(replicas), th(replicas), de(replicas), fo(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    num[i] = samples[i].numeric;
    th[i] = samples[i].theta;
    de[i] = samples[i].delta;
    fo[i] = rep.theta_one + th[i] + de[i];
  }
  rep.numeric = summarize(num);
  rep.theta_term = summarize(th);
  rep.delta_term = summarize(de);
  rep.formula = summarize(fo);
  rep.allowance = delta_t * delta_t;
  rep.check = check_equal("interpolation_derivative", rep.numeric, rep.formula,
                          multiplier, rep.allowance);
  return rep;
}

std::vector<OverlapMassEstimate> gibbs_overlap_masses(
    const SystemConfig& config, double t, std::size_t replicas,
    std::uint64_t seed) {
  validate_system(config);
  if (replicas < 2) throw std::invalid_argument("overlap masses need >= 2 replicas");
  const int k = config.rsb.k();
  const int n = config.n_sites;
  const double vk = leaf_variance(config.mixture, config.rsb);
  const double factor = std::exp(0.5 * (1.0 - t) * n * vk);
  struct Sample {
    std::vector<double> mass;
    double allowance = 0.0;
  };
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const auto sys = build_system(config, t, replica_seed(seed, i));
    const auto pairs = sys.pair_distribution();
    Sample s;
    for (const auto& row : pairs) {
      double m = 0.0;
      for (double x : row) m += x;
      s.mass.push_back(m);
    }
    s.allowance = sys.cascade().truncation_allowance(factor);
    return s;
  });
  double allowance = 0.0;
  for (const auto& s : samples) allowance += s.allowance;
  allowance /= static_cast<double>(replicas);
  std::vector<OverlapMassEstimate> out;
  for (int r = 1; r <= k + 1; ++r) {
    std::vector<double> col(replicas);
    for (std::size_t i = 0; i < replicas; ++i) {
      col[i] = samples[i].mass[static_cast<std::size_t>(r) - 1];
    }
    OverlapMassEstimate e;
    e.r = r;
    e.estimate = summarize(col);
    e.target = pd_target(config.rsb, r);
    e.allowance = allowance;
    out.push_back(e);
  }
  return out;
}

OverlapMassEstimate gibbs_overlap_mass(const SystemConfig& config, double t,
                                       int r, std::size_t replicas,
                                       std::uint64_t seed) {
  if (r < 1 || r > config.rsb.k() + 1) throw std::invalid_argument("r must lie in 1..k+1");
  return gibbs_overlap_masses(config, t, replicas, seed)[static_cast<std::size_t>(r) - 1];
}

// ---- coupled system --------------------------------------------------------

double CoupledGibbsSystem::average(std::span<const double> f) const {
  if (f.size() != static_cast<std::size_t>(n_) + 1) {
    throw std::invalid_argument("observable must have N + 1 entries");
  }
  const std::size_t configs = std::size_t{1} << n_;
  std::vector<double> by_class(f.size(), 0.0);
  for (std::size_t row = 0; row < row_weight_.size(); ++row) {
    accumulate_pairs(std::span<const double>(copy1_).subspan(row * configs, configs),
                     std::span<const double>(copy2_).subspan(row * configs, configs),
                     row_weight_[row], by_class);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * by_class[j];
  return s;
}

double CoupledGibbsSystem::total_probability() const {
  double s = 0.0;
  for (double w : row_weight_) s += w;
  return s;
}

RSBParams coupled_parameters(const RSBParams& rsb, int r) {
  const int k = rsb.k();
  if (r < 1 || r > k) throw std::invalid_argument("r must lie in 1..k");
  std::vector<double> n(static_cast<std::size_t>(k)), q(static_cast<std::size_t>(k));
  for (int l = 1; l <= k; ++l) {
    n[static_cast<std::size_t>(l) - 1] = l < r ? 0.5 * rsb.m(l) : rsb.m(l);
    q[static_cast<std::size_t>(l) - 1] = rsb.q(l);
  }
  return RSBParams(std::move(n), std::move(q));
}

CoupledGibbsSystem build_coupled_system(const SystemConfig& config, double t,
                                        int r, std::uint64_t seed) {
  validate_system(config);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");
  const int n = config.n_sites;
  const int k = config.rsb.k();
  CoupledGibbsSystem sys(build_cascade(coupled_parameters(config.rsb, r),
                                       config.branching, seed, config.cascade));
  sys.r_ = r;
  sys.n_ = n;
  const Cascade& c = sys.cascade_;
  const auto table = sample_hamiltonian(n, config.mixture, seed);
  const CascadeFields fields1(k, config.branching, config.mixture, config.rsb, n, seed);
  const CascadeFields fields2 = fields1.coupled_copy(r, derive_seed(seed, 2));
  const std::vector<std::vector<double>> prefix[2] = {prefix_fields(fields1),
                                                      prefix_fields(fields2)};
  const auto base = base_energy(table, t, config.h);
  const std::size_t configs = std::size_t{1} << n;
  const double scale = std::sqrt(1.0 - t);
  const double vk = leaf_variance(config.mixture, config.rsb);

  const std::size_t leaves = c.leaf_count();
  const std::size_t parents = c.has_remainder() ? c.tail_w().size() : 0;
  const std::size_t rows = leaves + parents;
  const auto nn = static_cast<std::size_t>(n);
  std::vector<double> log_row(rows);
  sys.copy1_.resize(rows * configs);
  sys.copy2_.resize(rows * configs);
  std::vector<double>* copies[2] = {&sys.copy1_, &sys.copy2_};
  for (std::size_t row = 0; row < rows; ++row) {
    const bool leaf = row < leaves;
    const std::size_t node = leaf ? row : row - leaves;
    const double w = leaf ? c.w()[node] : c.tail_w()[node];
    double lw = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) +
                (leaf ? 0.0 : (1.0 - t) * n * vk);
    for (int copy = 0; copy < 2; ++copy) {
      const auto& level = prefix[copy][static_cast<std::size_t>(leaf ? k : k - 1)];
      const std::span<const double> field(level.data() + node * nn, nn);
      const auto out = std::span<double>(*copies[copy]).subspan(row * configs, configs);
      row_energy(base, field, scale, n, out);
      const double z = log_sum_exp(out);
      for (double& e : out) e = std::exp(e - z);
      lw += z;
    }
    log_row[row] = lw;
  }
  const double total = log_sum_exp(log_row);
  sys.row_weight_.resize(rows);
  for (std::size_t row = 0; row < rows; ++row) {
    sys.row_weight_[row] = std::exp(log_row[row] - total);
  }
  return sys;
}

std::vector<double> observable_by_overlap(ReplicaObservable f, int n_sites,
                                          const MixtureFunction& mix, double q) {
  if (n_sites < 1) throw std::invalid_argument("N must be positive");
  std::vector<double> out(static_cast<std::size_t>(n_sites) + 1);
  for (int j = 0; j <= n_sites; ++j) {
    const double R = overlap_value(j, n_sites);
    double v = 1.0;
    if (f == ReplicaObservable::kOverlap) v = R;
    if (f == ReplicaObservable::kDelta) v = delta(mix, R, q);
    out[static_cast<std::size_t>(j)] = v;
  }
  return out;
}

CoupledEstimate coupled_average(const SystemConfig& config, double t, int r,
                                ReplicaObservable f, std::size_t replicas,
                                std::uint64_t seed) {
  validate_system(config);
  if (replicas < 2) throw std::invalid_argument("coupled average needs >= 2 replicas");
  const auto table = observable_by_overlap(f, config.n_sites, config.mixture,
                                           config.rsb.q(r));
  double f_max = 0.0;
  for (double v : table) f_max = std::max(f_max, std::abs(v));
  const double vk = leaf_variance(config.mixture, config.rsb);
  const double factor = std::exp((1.0 - t) * config.n_sites * vk);
  struct Sample {
    double value = 0.0, allowance = 0.0;
  };
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const auto sys = build_coupled_system(config, t, r, replica_seed(seed, i));
    return Sample{sys.average(table),
                  2.0 * sys.cascade().truncation_allowance(factor) * f_max};
  });
  std::vector<double> values(replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    values[i] = samples[i].value;
    allowance += samples[i].allowance;
  }
  return {summarize(values), allowance / static_cast<double>(replicas)};
}

ErrorTermReport error_term_check(const SystemConfig& config, double t, int r,
                                 std::size_t replicas, std::uint64_t seed,
                                 bool quadrature_cross_check,
                                 double multiplier) {
  validate_system(config);
  const int k = config.rsb.k();
  if (config.n_sites > 4 || k > 2) {
    throw std::invalid_argument("error term check needs N <= 4 and k <= 2");
  }
  if (r < 1 || r > k) throw std::invalid_argument("r must lie in 1..k");
  if (replicas < 2) throw std::invalid_argument("error term check needs >= 2 replicas");
  const int n = config.n_sites;
  const double q = config.rsb.q(r);
  const auto table = observable_by_overlap(ReplicaObservable::kDelta, n,
                                           config.mixture, q);
  double f_max = 0.0;
  for (double v : table) f_max = std::max(f_max, std::abs(v));
  const double vk = leaf_variance(config.mixture, config.rsb);
  const double factor = std::exp(0.5 * (1.0 - t) * n * vk);

  struct Sample {
    double value = 0.0, allowance = 0.0;
  };
  const std::uint64_t lhs_seed = derive_seed(seed, 1);
  const auto lhs = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const auto sys = build_system(config, t, replica_seed(lhs_seed, i));
    const auto pairs = sys.pair_distribution();
    const auto& row = pairs[static_cast<std::size_t>(r) - 1];
    Sample s;
    double mass = 0.0;
    for (int j = 0; j <= n; ++j) {
      s.value += table[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
      mass += row[static_cast<std::size_t>(j)];
    }
    s.allowance = 2.0 * sys.cascade().truncation_allowance(factor) * f_max *
                  std::max(mass, 0.0);
    return s;
  });
  std::vector<double> lhs_values(replicas);
  double lhs_allowance = 0.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    lhs_values[i] = lhs[i].value;
    lhs_allowance += lhs[i].allowance;
  }
  lhs_allowance /= static_cast<double>(replicas);

  const double gap = config.rsb.m(r) - config.rsb.m(r - 1);
  const auto coupled = coupled_average(config, t, r, ReplicaObservable::kDelta,
                                       replicas, derive_seed(seed, 2));

  ErrorTermReport rep;
  rep.r = r;
  rep.t = t;
  rep.lhs = summarize(lhs_values);
  rep.rhs = coupled.average;
  rep.rhs.mean *= gap;
  rep.rhs.std_error *= gap;
  rep.allowance = lhs_allowance + gap * coupled.allowance;
  if (quadrature_cross_check && n <= 2) {
    const auto mu = mu_r_quadrature(n, config.mixture, config.rsb, config.h, t, r,
                                    ReplicaObservable::kDelta, QuadratureSpec{});
    rep.quadrature = gap * mu.w_form / mu.normalization;
  }
  rep.check = check_equal("error_term_r" + std::to_string(r), rep.lhs, rep.rhs,
                          multiplier, rep.allowance);
  return rep;
}

}  // namespace rsb
