#include "rsb/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsb/parallel.hpp"
#include "rsb/quadrature.hpp"
#include "rsb/recursion.hpp"

namespace rsb {

std::uint64_t cascade_block_seed(std::uint64_t seed, int depth,
                                 std::uint64_t index) {
  return derive_seed(stream_seed(seed, Stream::kCascadePoints),
                     {static_cast<std::uint64_t>(depth), index});
}

std::size_t Cascade::nodes_at(int depth) const {
  std::size_t n = 1;
  for (int l = 0; l < depth; ++l) n *= static_cast<std::size_t>(b_);
  return n;
}

std::span<const double> Cascade::points(int l) const {
  if (l < 1 || l > k()) throw std::out_of_range("cascade level out of range");
  return points_[static_cast<std::size_t>(l) - 1];
}

std::span<const double> Cascade::path_product(int depth) const {
  if (depth < 0 || depth > k()) throw std::out_of_range("depth out of range");
  return prefix_[static_cast<std::size_t>(depth)];
}

std::span<const double> Cascade::node_mass(int depth) const {
  if (depth < 0 || depth > k()) throw std::out_of_range("depth out of range");
  return mass_[static_cast<std::size_t>(depth)];
}

double Cascade::truncation_allowance(double leaf_factor) const {
  return 2.0 * intermediate_tail_ + 2.0 * leaf_spread_ * leaf_factor;
}

Cascade build_cascade(const RSBParams& rsb, int b, std::uint64_t seed,
                      const CascadeOptions& options) {
  rsb.require_simulable();
  const int k = rsb.k();
  if (b < 2) throw std::invalid_argument("cascade branching must be >= 2");
  if (std::pow(static_cast<double>(b), k) > 1e6) {
    throw std::invalid_argument("cascade leaf count b^k exceeds 10^6");
  }
  Cascade c(rsb, b);
  c.remainder_ = options.leaf_remainder;
  const auto bb = static_cast<std::size_t>(b);

  c.prefix_.assign(static_cast<std::size_t>(k) + 1, {});
  c.prefix_[0] = {1.0};
  for (int l = 1; l <= k; ++l) {
    const double m = rsb.m(l);
    const std::size_t parents = c.nodes_at(l - 1);
    std::vector<double> pts;
    pts.reserve(parents * bb);
    for (std::size_t p = 0; p < parents; ++p) {
      Engine engine(
          stream_seed(cascade_block_seed(seed, l - 1, p), Stream::kPdPoints));
      double gamma = 0.0;
      append_poisson_points(m, bb, engine, gamma, pts);
    }
    std::vector<double> prefix(pts.size());
    const auto& up = c.prefix_[static_cast<std::size_t>(l) - 1];
    for (std::size_t i = 0; i < pts.size(); ++i) prefix[i] = up[i / bb] * pts[i];
    c.points_.push_back(std::move(pts));
    c.prefix_[static_cast<std::size_t>(l)] = std::move(prefix);
  }
  c.v_ = c.prefix_[static_cast<std::size_t>(k)];

  // Leaf remainders, one per leaf-level parent.
  const std::size_t parents = c.nodes_at(k - 1);
  const auto& leaf_pts = c.points_.back();
  c.tail_mass_.assign(parents, 0.0);
  c.tail_square_.assign(parents, 0.0);
  if (c.remainder_) {
    for (std::size_t a = 0; a < parents; ++a) {
      const PoissonRemainder rem =
          poisson_remainder(rsb.m(k), leaf_pts[a * bb + bb - 1]);
      c.tail_mass_[a] = rem.mass;
      c.tail_square_[a] = rem.square_mass;
    }
  }

  // Node masses, bottom-up.
  c.mass_.assign(static_cast<std::size_t>(k) + 1, {});
  c.mass_[static_cast<std::size_t>(k)] = c.v_;
  {
    std::vector<double> up(parents, 0.0);
    for (std::size_t i = 0; i < c.v_.size(); ++i) up[i / bb] += c.v_[i];
    const auto& vp = c.prefix_[static_cast<std::size_t>(k) - 1];
    for (std::size_t a = 0; a < parents; ++a) up[a] += vp[a] * c.tail_mass_[a];
    c.mass_[static_cast<std::size_t>(k) - 1] = std::move(up);
  }
  for (int d = k - 2; d >= 0; --d) {
    const auto& below = c.mass_[static_cast<std::size_t>(d) + 1];
    std::vector<double> up(c.nodes_at(d), 0.0);
    for (std::size_t i = 0; i < below.size(); ++i) up[i / bb] += below[i];
    c.mass_[static_cast<std::size_t>(d)] = std::move(up);
  }
  c.total_ = c.mass_[0][0];

  c.w_.resize(c.v_.size());
  for (std::size_t i = 0; i < c.v_.size(); ++i) c.w_[i] = c.v_[i] / c.total_;
  c.tail_w_.resize(parents);
  const auto& vp = c.prefix_[static_cast<std::size_t>(k) - 1];
  for (std::size_t a = 0; a < parents; ++a) {
    c.tail_w_[a] = vp[a] * c.tail_mass_[a] / c.total_;
  }

  // Truncation bound: mass-weighted relative tails of the truncated blocks.
  const int last_truncated = c.remainder_ ? k - 1 : k;
  for (int l = 1; l <= last_truncated; ++l) {
    const auto& pts = c.points_[static_cast<std::size_t>(l) - 1];
    const auto& pmass = c.mass_[static_cast<std::size_t>(l) - 1];
    for (std::size_t p = 0; p < pmass.size(); ++p) {
      double s = 0.0;
      for (std::size_t j = 0; j < bb; ++j) s += pts[p * bb + j];
      const double tail = poisson_remainder(rsb.m(l), pts[p * bb + bb - 1]).mass;
      c.intermediate_tail_ += pmass[p] / c.total_ * tail / s;
    }
  }
  if (c.remainder_) {
    const auto& pmass = c.mass_[static_cast<std::size_t>(k) - 1];
    for (std::size_t a = 0; a < parents; ++a) {
      double s = 0.0;
      for (std::size_t j = 0; j < bb; ++j) s += leaf_pts[a * bb + j];
      c.leaf_spread_ += pmass[a] / c.total_ * std::sqrt(c.tail_square_[a]) /
                        (s + c.tail_mass_[a]);
    }
  }
  c.allowance_ = c.truncation_allowance(1.0);
  return c;
}

std::size_t TreeIndex::prefix(int l, int b) const {
  std::size_t idx = 0;
  for (int j = 0; j < l; ++j) {
    idx = idx * static_cast<std::size_t>(b) +
          static_cast<std::size_t>(path[static_cast<std::size_t>(j)]);
  }
  return idx;
}

TreeIndex leaf_path(std::size_t leaf, int b, int k) {
  TreeIndex t;
  t.path.assign(static_cast<std::size_t>(k), 0);
  for (int l = k - 1; l >= 0; --l) {
    t.path[static_cast<std::size_t>(l)] =
        static_cast<int>(leaf % static_cast<std::size_t>(b));
    leaf /= static_cast<std::size_t>(b);
  }
  return t;
}

std::size_t leaf_index(const TreeIndex& alpha, int b) {
  return alpha.prefix(alpha.k(), b);
}

std::size_t ancestor(std::size_t leaf, int l, int b, int k) {
  for (int j = l; j < k; ++j) leaf /= static_cast<std::size_t>(b);
  return leaf;
}

int meet(const TreeIndex& a, const TreeIndex& b) {
  if (a.k() != b.k()) throw std::invalid_argument("meet: paths of unequal depth");
  for (int l = 0; l < a.k(); ++l) {
    if (a.path[static_cast<std::size_t>(l)] != b.path[static_cast<std::size_t>(l)]) {
      return l + 1;
    }
  }
  return a.k() + 1;
}

int meet(std::size_t leaf_a, std::size_t leaf_b, int b, int k) {
  for (int l = 1; l <= k; ++l) {
    if (ancestor(leaf_a, l, b, k) != ancestor(leaf_b, l, b, k)) return l;
  }
  return k + 1;
}

std::vector<double> overlap_masses(const Cascade& c) {
  const int k = c.k();
  const auto bb = static_cast<std::size_t>(c.branching());
  const double t2 = c.total() * c.total();
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);

  // Within-cloud pairs of each remainder count on the diagonal.
  const auto vp = c.path_product(k - 1);
  double tail_diag = 0.0;
  for (std::size_t a = 0; a < vp.size(); ++a) {
    tail_diag += vp[a] * vp[a] * c.tail_square_mass()[a];
  }
  double leaf_diag = 0.0;
  for (double v : c.v()) leaf_diag += v * v;

  for (int r = 1; r <= k; ++r) {
    const auto parent = c.node_mass(r - 1);
    const auto child = c.node_mass(r);
    double s = 0.0;
    for (double m : parent) s += m * m;
    double sub = 0.0;
    for (double m : child) sub += m * m;
    if (r == k) sub += tail_diag;
    out[static_cast<std::size_t>(r) - 1] = (s - sub) / t2;
  }
  (void)bb;
  out[static_cast<std::size_t>(k)] = (leaf_diag + tail_diag) / t2;
  return out;
}

CheckRecord OverlapMassEstimate::check(double multiplier) const {
  return check_equal("overlap_mass_r" + std::to_string(r), estimate,
                     exact(target), multiplier, allowance);
}

std::vector<OverlapMassEstimate> overlap_mass_table(
    const RSBParams& rsb, int b, std::size_t replicas, std::uint64_t seed,
    const CascadeOptions& options) {
  rsb.require_simulable();
  if (replicas < 2) throw std::invalid_argument("replicas must be >= 2");
  const int k = rsb.k();
  struct Sample {
    std::vector<double> masses;
    double allowance = 0.0;
  };
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    const Cascade c = build_cascade(rsb, b, replica_seed(seed, i), options);
    return Sample{overlap_masses(c), c.truncation_allowance()};
  });
  double allowance = 0.0;
  for (const auto& s : samples) allowance += s.allowance;
  allowance /= static_cast<double>(replicas);

  std::vector<OverlapMassEstimate> out;
  for (int r = 1; r <= k + 1; ++r) {
    std::vector<double> v(replicas);
    for (std::size_t i = 0; i < replicas; ++i) {
      v[i] = samples[i].masses[static_cast<std::size_t>(r) - 1];
    }
    OverlapMassEstimate e;
    e.r = r;
    e.estimate = summarize(v);
    e.target = r <= k ? rsb.m(r) - rsb.m(r - 1) : 1.0 - rsb.m(k);
    e.allowance = allowance;
    out.push_back(e);
  }
  return out;
}

OverlapMassEstimate overlap_mass(const RSBParams& rsb, int b, int r,
                                 std::size_t replicas, std::uint64_t seed,
                                 const CascadeOptions& options) {
  if (r < 1 || r > rsb.k() + 1) {
    throw std::invalid_argument("overlap level r must lie in 1..k+1");
  }
  return overlap_mass_table(rsb, b, replicas, seed, options)
      [static_cast<std::size_t>(r) - 1];
}

nlohmann::ordered_json snapshot(const Cascade& c) {
  nlohmann::ordered_json j;
  j["k"] = c.k();
  j["b"] = c.branching();
  j["m"] = c.rsb().m_inner();
  j["q"] = c.rsb().q_inner();
  j["total"] = c.total();
  auto leaves = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.leaf_count(); ++i) {
    nlohmann::ordered_json leaf;
    leaf["path"] = leaf_path(i, c.branching(), c.k()).path;
    leaf["v"] = c.v()[i];
    leaf["w"] = c.w()[i];
    leaves.push_back(std::move(leaf));
  }
  j["leaves"] = std::move(leaves);
  if (c.has_remainder()) {
    auto tails = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < c.tail_w().size(); ++a) {
      nlohmann::ordered_json t;
      t["parent"] = leaf_path(a, c.branching(), c.k() - 1).path;
      t["mass"] = c.tail_mass()[a];
      t["square_mass"] = c.tail_square_mass()[a];
      t["w"] = c.tail_w()[a];
      tails.push_back(std::move(t));
    }
    j["remainders"] = std::move(tails);
  }
  return j;
}

// ---- fields --------------------------------------------------------------

CascadeFields::CascadeFields(int k, int b, const MixtureFunction& mix,
                             const RSBParams& rsb, int n_sites,
                             std::uint64_t seed)
    : k_(k), b_(b), n_(n_sites), seed_(seed), shared_seed_(seed) {
  if (k != rsb.k()) throw std::invalid_argument("fields: depth mismatch");
  if (n_sites < 1 || n_sites > 20) {
    throw std::invalid_argument("fields support 1 <= N <= 20");
  }
  variances_ = column_variances(mix, rsb);
}

CascadeFields CascadeFields::coupled_copy(int r, std::uint64_t seed) const {
  if (r < 1 || r > k_) throw std::invalid_argument("coupled copy needs 1 <= r <= k");
  CascadeFields copy = *this;
  copy.shared_seed_ = seed_;
  copy.seed_ = seed;
  copy.shared_below_ = r;
  return copy;
}

std::vector<double> CascadeFields::column(int l, std::size_t node) const {
  if (l < 0 || l > k_) throw std::out_of_range("field column out of range");
  const std::uint64_t base = l < shared_below_ ? shared_seed_ : seed_;
  Engine engine(derive_seed(stream_seed(base, Stream::kFields),
                            {static_cast<std::uint64_t>(l), node}));
  const double sd = std::sqrt(variances_[static_cast<std::size_t>(l)]);
  std::vector<double> z(static_cast<std::size_t>(n_));
  for (double& x : z) x = sd * standard_normal(engine);
  return z;
}

std::vector<double> CascadeFields::prefix_field(int depth,
                                                std::size_t node) const {
  std::vector<double> s = column(0, 0);
  for (int l = depth; l >= 1; --l) {
    const auto z = column(l, node);
    for (int i = 0; i < n_; ++i) s[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
    node /= static_cast<std::size_t>(b_);
  }
  return s;
}

std::vector<double> CascadeFields::leaf_field(std::size_t leaf) const {
  return prefix_field(k_, leaf);
}

CascadeFields attach_fields(const Cascade& cascade, const MixtureFunction& mix,
                            int n_sites, std::uint64_t seed) {
  return CascadeFields(cascade.k(), cascade.branching(), mix, cascade.rsb(),
                       n_sites, seed);
}

// ---- marked cascades -------------------------------------------------------

MarkedCascade::MarkedCascade(Cascade cascade,
                             std::vector<double> mark_variances,
                             std::uint64_t seed)
    : cascade_(std::move(cascade)), variances_(std::move(mark_variances)) {
  const int k = cascade_.k();
  if (variances_.size() != static_cast<std::size_t>(k) + 1) {
    throw std::invalid_argument("need one mark variance per level 0..k");
  }
  for (double v : variances_) {
    if (!(v >= 0.0)) throw std::invalid_argument("mark variance must be >= 0");
  }
  const std::uint64_t base = stream_seed(seed, Stream::kCascadeMarks);
  auto draw = [&](int l, std::size_t node) {
    Engine engine(derive_seed(base, {static_cast<std::uint64_t>(l), node}));
    return std::sqrt(variances_[static_cast<std::size_t>(l)]) *
           standard_normal(engine);
  };
  root_ = draw(0, 0);
  for (int l = 1; l <= k; ++l) {
    std::vector<double> z(cascade_.nodes_at(l));
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = draw(l, i);
    marks_.push_back(std::move(z));
  }
}

std::span<const double> MarkedCascade::marks(int l) const {
  if (l < 1 || l > cascade_.k()) throw std::out_of_range("mark level out of range");
  return marks_[static_cast<std::size_t>(l) - 1];
}

void MarkedCascade::path_marks(std::size_t leaf, std::span<double> out) const {
  const int k = cascade_.k();
  out[0] = root_;
  for (int l = k; l >= 1; --l) {
    out[static_cast<std::size_t>(l)] = marks_[static_cast<std::size_t>(l) - 1][leaf];
    leaf /= static_cast<std::size_t>(cascade_.branching());
  }
}

void MarkedCascade::parent_marks(std::size_t parent,
                                 std::span<double> out) const {
  const int k = cascade_.k();
  out[0] = root_;
  for (int l = k - 1; l >= 1; --l) {
    out[static_cast<std::size_t>(l)] = marks_[static_cast<std::size_t>(l) - 1][parent];
    parent /= static_cast<std::size_t>(cascade_.branching());
  }
  out[static_cast<std::size_t>(k)] = 0.0;
}

std::vector<double> default_mark_variances(int k) {
  return std::vector<double>(static_cast<std::size_t>(k) + 1, 0.5);
}

CheckRecord IdentityEstimate::check(double multiplier) const {
  return check_equal(name, mc, exact(reference), multiplier, allowance);
}

namespace {

// Leaf weights e_alpha = v_alpha exp(X_alpha - shift) of a marked cascade,
// with each remainder represented by Gauss-Hermite averages over a fresh
// leaf mark.
class TiltedLeaves {
 public:
  TiltedLeaves(const MarkedCascade& mc, const PathFunctional& x, int nodes)
      : mc_(mc), x_(x), rule_(gauss_hermite(nodes)) {
    const Cascade& c = mc.cascade();
    const int k = c.k();
    marks_.assign(c.leaf_count(), std::vector<double>(static_cast<std::size_t>(k) + 1));
    xs_.resize(c.leaf_count());
    shift_ = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.leaf_count(); ++i) {
      mc.path_marks(i, marks_[i]);
      xs_[i] = x(marks_[i]);
      shift_ = std::max(shift_, xs_[i]);
    }
    e_.resize(c.leaf_count());
    for (std::size_t i = 0; i < e_.size(); ++i) {
      e_[i] = c.v()[i] * std::exp(xs_[i] - shift_);
    }
  }

  const Cascade& cascade() const { return mc_.cascade(); }
  double shift() const { return shift_; }
  std::span<const double> e() const { return e_; }
  std::span<const double> marks(std::size_t leaf) const { return marks_[leaf]; }

  // V_a D_a^{(power)} E_z[exp(power (X - shift)) f(z)] for the remainder of
  // parent a, power 1 with D or power 2 with D2 (and V_a^2).
  template <class F>
  double remainder(std::size_t a, int power, F&& f) const {
    const Cascade& c = mc_.cascade();
    if (!c.has_remainder()) return 0.0;
    const int k = c.k();
    std::vector<double> z(static_cast<std::size_t>(k) + 1);
    mc_.parent_marks(a, z);
    const double sd = std::sqrt(mc_.mark_variances()[static_cast<std::size_t>(k)]);
    double avg = 0.0;
    const auto nodes = rule_.nodes();
    const auto w = rule_.weights();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      z[static_cast<std::size_t>(k)] = sd * nodes[j];
      avg += w[j] * std::exp(power * (x_(z) - shift_)) * f(std::span<const double>(z));
      if (sd == 0.0) {
        avg /= w[j];
        break;
      }
    }
    const double vp = c.path_product(k - 1)[a];
    return power == 1 ? vp * c.tail_mass()[a] * avg
                      : vp * vp * c.tail_square_mass()[a] * avg;
  }

  // Partition sum Z, remainders included.
  double partition() const {
    double z = 0.0;
    for (double e : e_) z += e;
    const std::size_t parents = cascade().nodes_at(cascade().k() - 1);
    for (std::size_t a = 0; a < parents; ++a) {
      z += remainder(a, 1, [](std::span<const double>) { return 1.0; });
    }
    return z;
  }

  // Relative truncation error of Z: truncated levels plus twice the spread
  // of the remainder sums.
  double relative_allowance(double z) const {
    const std::size_t parents = cascade().nodes_at(cascade().k() - 1);
    double var = 0.0;
    for (std::size_t a = 0; a < parents; ++a) {
      var += remainder(a, 2, [](std::span<const double>) { return 1.0; });
    }
    return cascade().truncation_allowance(0.0) + 2.0 * std::sqrt(var) / z;
  }

 private:
  const MarkedCascade& mc_;
  const PathFunctional& x_;
  const GaussHermiteRule& rule_;
  std::vector<std::vector<double>> marks_;
  std::vector<double> xs_, e_;
  double shift_ = 0.0;
};

void require_variances(const RSBParams& rsb, std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(rsb.k()) + 1) {
    throw std::invalid_argument("need one mark variance per level 0..k");
  }
}

}  // namespace

IdentityEstimate log_partition_identity(const RSBParams& rsb,
                                        std::span<const double> mark_variances,
                                        const PathFunctional& x,
                                        const MarkedOptions& options,
                                        std::uint64_t seed) {
  rsb.require_simulable();
  require_variances(rsb, mark_variances);
  const std::vector<double> vars(mark_variances.begin(), mark_variances.end());
  struct Sample {
    double value = 0.0, allowance = 0.0;
  };
  const auto samples =
      parallel_map<Sample>(options.replicas, [&](std::size_t i) {
        const std::uint64_t rs = replica_seed(seed, i);
        const MarkedCascade mc(
            build_cascade(rsb, options.branching, rs, options.cascade), vars, rs);
        const TiltedLeaves leaves(mc, x, options.nodes);
        const double z = leaves.partition();
        return Sample{std::log(z) + leaves.shift() - std::log(mc.cascade().total()),
                      leaves.relative_allowance(z)};
      });
  std::vector<double> v(options.replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < options.replicas; ++i) {
    v[i] = samples[i].value;
    allowance += samples[i].allowance;
  }
  IdentityEstimate out;
  out.name = "log_partition[" + x.describe() + "]";
  out.mc = summarize(v);
  out.reference = reference_log_partition(rsb, mark_variances, x, options.nodes);
  out.allowance = allowance / static_cast<double>(options.replicas);
  return out;
}

IdentityEstimate tilted_average(const RSBParams& rsb,
                                std::span<const double> mark_variances,
                                const PathFunctional& x,
                                const TiltedObservable& y,
                                std::optional<int> restricted_r,
                                const MarkedOptions& options,
                                std::uint64_t seed) {
  rsb.require_simulable();
  require_variances(rsb, mark_variances);
  const int k = rsb.k();
  if (restricted_r && !std::holds_alternative<PairFunctional>(y)) {
    throw std::invalid_argument(
        "the restricted average needs a two-path functional Y");
  }
  if (!restricted_r && !std::holds_alternative<PathFunctional>(y)) {
    throw std::invalid_argument(
        "the unrestricted average needs a single-path functional Y");
  }
  if (restricted_r && (*restricted_r < 1 || *restricted_r > k)) {
    throw std::invalid_argument("restricted level r must lie in 1..k");
  }
  const std::vector<double> vars(mark_variances.begin(), mark_variances.end());
  const auto bb = static_cast<std::size_t>(options.branching);

  struct Sample {
    double value = 0.0, allowance = 0.0;
  };
  const auto samples =
      parallel_map<Sample>(options.replicas, [&](std::size_t i) {
        const std::uint64_t rs = replica_seed(seed, i);
        const MarkedCascade mc(
            build_cascade(rsb, options.branching, rs, options.cascade), vars, rs);
        const TiltedLeaves leaves(mc, x, options.nodes);
        const Cascade& c = mc.cascade();
        const double z = leaves.partition();
        const double eps = leaves.relative_allowance(z);
        const std::size_t parents = c.nodes_at(k - 1);

        if (!restricted_r) {
          const auto& yf = std::get<PathFunctional>(y);
          double num = 0.0, num_abs = 0.0;
          for (std::size_t a = 0; a < c.leaf_count(); ++a) {
            const double val = yf(leaves.marks(a));
            num += leaves.e()[a] * val;
            num_abs += leaves.e()[a] * std::abs(val);
          }
          for (std::size_t a = 0; a < parents; ++a) {
            num += leaves.remainder(a, 1, [&](auto zz) { return yf(zz); });
            num_abs += leaves.remainder(a, 1, [&](auto zz) { return std::abs(yf(zz)); });
          }
          const double ratio = num / z;
          return Sample{ratio, eps * (num_abs / z + std::abs(ratio))};
        }

        const int r = *restricted_r;
        const auto& yp = std::get<PairFunctional>(y);
        const std::size_t terms = yp.term_count();
        double num = 0.0, num_abs = 0.0;
        for (std::size_t j = 0; j < terms; ++j) {
          // Aggregates of e * left_j and e * right_j per node, bottom-up.
          std::vector<double> left(c.leaf_count()), right(c.leaf_count());
          for (std::size_t a = 0; a < c.leaf_count(); ++a) {
            left[a] = leaves.e()[a] * yp.left(j, leaves.marks(a));
            right[a] = leaves.e()[a] * yp.right(j, leaves.marks(a));
          }
          double pair_sum = 0.0;
          double diag_sub = 0.0;
          int depth = k;
          std::vector<double> lc = left, rc = right;
          while (depth >= r) {
            // lc, rc are aggregates at `depth`; build the parents.
            std::vector<double> lp(c.nodes_at(depth - 1), 0.0), rp(lp.size(), 0.0);
            for (std::size_t n = 0; n < lc.size(); ++n) {
              lp[n / bb] += lc[n];
              rp[n / bb] += rc[n];
            }
            double child_pairs = 0.0;
            for (std::size_t n = 0; n < lc.size(); ++n) child_pairs += lc[n] * rc[n];
            if (depth == k) {
              for (std::size_t a = 0; a < parents; ++a) {
                lp[a] += leaves.remainder(a, 1, [&](auto zz) { return yp.left(j, zz); });
                rp[a] += leaves.remainder(a, 1, [&](auto zz) { return yp.right(j, zz); });
                diag_sub += leaves.remainder(a, 2, [&](auto zz) {
                  return yp.left(j, zz) * yp.right(j, zz);
                });
              }
              child_pairs += diag_sub;
            }
            if (depth == r) {
              double parent_pairs = 0.0;
              for (std::size_t n = 0; n < lp.size(); ++n) parent_pairs += lp[n] * rp[n];
              pair_sum = parent_pairs - child_pairs;
            }
            lc = std::move(lp);
            rc = std::move(rp);
            --depth;
          }
          num += pair_sum;
          num_abs += std::abs(pair_sum);
        }
        const double ratio = num / (z * z);
        return Sample{ratio, 2.0 * eps * (num_abs / (z * z) + std::abs(ratio))};
      });

  std::vector<double> v(options.replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < options.replicas; ++i) {
    v[i] = samples[i].value;
    allowance += samples[i].allowance;
  }
  IdentityEstimate out;
  out.mc = summarize(v);
  out.allowance = allowance / static_cast<double>(options.replicas);
  if (restricted_r) {
    const int r = *restricted_r;
    out.name = "tilted_restricted_r" + std::to_string(r) + "[" + x.describe() +
               "; " + std::get<PairFunctional>(y).describe() + "]";
    out.reference = (rsb.m(r) - rsb.m(r - 1)) *
                    reference_restricted(rsb, mark_variances, x,
                                         std::get<PairFunctional>(y), r,
                                         options.nodes);
  } else {
    out.name = "tilted[" + x.describe() + "; " +
               std::get<PathFunctional>(y).describe() + "]";
    out.reference = reference_tilted(rsb, mark_variances, x,
                                     std::get<PathFunctional>(y), options.nodes);
  }
  return out;
}

PairedEstimate tilt_invariance(const RSBParams& rsb,
                               std::span<const double> mark_variances,
                               const PathFunctional& x,
                               CascadeStatistic statistic,
                               const MarkedOptions& options,
                               std::uint64_t seed) {
  rsb.require_simulable();
  require_variances(rsb, mark_variances);
  const std::vector<double> vars(mark_variances.begin(), mark_variances.end());
  const int k = rsb.k();
  struct Sample {
    double lhs = 0.0, rhs = 0.0, allowance = 0.0;
  };
  const auto samples =
      parallel_map<Sample>(options.replicas, [&](std::size_t i) {
        const std::uint64_t rs = replica_seed(seed, i);
        const MarkedCascade mc(
            build_cascade(rsb, options.branching, rs, options.cascade), vars, rs);
        const TiltedLeaves leaves(mc, x, options.nodes);
        const Cascade& c = mc.cascade();
        const double z = leaves.partition();
        const double eps = leaves.relative_allowance(z);
        const std::size_t parents = c.nodes_at(k - 1);
        Sample s;
        if (statistic == CascadeStatistic::kPairSum) {
          double tilted = 0.0, plain = 0.0;
          for (std::size_t a = 0; a < c.leaf_count(); ++a) {
            tilted += leaves.e()[a] * leaves.e()[a];
            plain += c.v()[a] * c.v()[a];
          }
          const auto vp = c.path_product(k - 1);
          for (std::size_t a = 0; a < parents; ++a) {
            tilted += leaves.remainder(a, 2, [](auto) { return 1.0; });
            plain += vp[a] * vp[a] * c.tail_square_mass()[a];
          }
          s.lhs = tilted / (z * z);
          s.rhs = plain / (c.total() * c.total());
          s.allowance = 2.0 * eps * s.lhs + 2.0 * c.truncation_allowance() * s.rhs;
        } else {
          s.lhs = *std::max_element(leaves.e().begin(), leaves.e().end()) / z;
          s.rhs = *std::max_element(c.v().begin(), c.v().end()) / c.total();
          s.allowance = eps * s.lhs + c.truncation_allowance() * s.rhs;
        }
        return s;
      });
  std::vector<double> lhs(options.replicas), rhs(options.replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < options.replicas; ++i) {
    lhs[i] = samples[i].lhs;
    rhs[i] = samples[i].rhs;
    allowance += samples[i].allowance;
  }
  PairedEstimate out;
  out.statistic = std::string(statistic == CascadeStatistic::kPairSum
                                  ? "tilted_pair_sum"
                                  : "tilted_top_weight") +
                  "[" + x.describe() + "]";
  out.lhs = summarize(lhs);
  out.rhs = summarize(rhs);
  out.n_max = static_cast<std::size_t>(options.branching);
  out.allowance = allowance / static_cast<double>(options.replicas);
  return out;
}

}  // namespace rsb
