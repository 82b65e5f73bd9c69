#include "rsb/pd_process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rsb/parallel.hpp"

namespace rsb {
namespace {

void require_m(double m) {
  if (!(m > 0.0 && m < 1.0)) {
    throw std::invalid_argument(
        "PD(m, 0) needs 0 < m < 1; at m = 1 the point sum diverges");
  }
}

void require_n_max(std::size_t n_max) {
  if (n_max < 10) throw std::invalid_argument("n_max must be at least 10");
}

Engine points_engine(std::uint64_t seed) {
  return Engine(stream_seed(seed, Stream::kPdPoints));
}

// Running sums of a truncated process, enough for every pair-sum statistic.
struct PointSums {
  double s1 = 0.0;
  double s2 = 0.0;
  double last = 0.0;
};

PointSums stream_sums(double m, std::size_t n_max, Engine& engine) {
  const double inv_m = 1.0 / m;
  double gamma = 0.0;
  PointSums out;
  for (std::size_t n = 0; n < n_max; ++n) {
    gamma += standard_exponential(engine);
    const double u = std::exp(-inv_m * std::log(m * gamma));
    out.s1 += u;
    out.s2 += u * u;
    out.last = u;
  }
  return out;
}

std::vector<double> replica_points(double m, std::size_t n_max,
                                   std::uint64_t rs) {
  std::vector<double> u;
  u.reserve(n_max);
  Engine engine = points_engine(rs);
  double gamma = 0.0;
  append_poisson_points(m, n_max, engine, gamma, u);
  return u;
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

void append_poisson_points(double m, std::size_t count, Engine& engine,
                           double& gamma, std::vector<double>& out) {
  require_m(m);
  const double inv_m = 1.0 / m;
  for (std::size_t n = 0; n < count; ++n) {
    gamma += standard_exponential(engine);
    out.push_back(std::exp(-inv_m * std::log(m * gamma)));
  }
}

PoissonRemainder poisson_remainder(double m, double cutoff) {
  require_m(m);
  return {std::pow(cutoff, 1.0 - m) / (1.0 - m),
          std::pow(cutoff, 2.0 - m) / (2.0 - m)};
}

PDRealization sample_pd(double m, std::size_t n_max, std::uint64_t seed) {
  require_m(m);
  require_n_max(n_max);
  PDRealization r;
  r.m = m;
  r.u = replica_points(m, n_max, seed);
  r.total = sum_of(r.u);
  r.w.resize(r.u.size());
  for (std::size_t n = 0; n < r.u.size(); ++n) r.w[n] = r.u[n] / r.total;
  r.tail_bound = poisson_remainder(m, r.u.back()).mass / r.total;
  return r;
}

PairSumEstimate estimate_pair_sum(double m, std::size_t n_max,
                                  std::size_t replicas, std::uint64_t seed) {
  require_m(m);
  require_n_max(n_max);
  if (replicas < 100) throw std::invalid_argument("replicas must be >= 100");

  struct Sample {
    double pair_sum = 0.0;
    double tail = 0.0;
  };
  const auto samples = parallel_map<Sample>(replicas, [&](std::size_t i) {
    Engine engine = points_engine(replica_seed(seed, i));
    const PointSums s = stream_sums(m, n_max, engine);
    return Sample{s.s2 / (s.s1 * s.s1),
                  poisson_remainder(m, s.last).mass / s.s1};
  });

  std::vector<double> values(replicas);
  double tail = 0.0;
  double allowance = 0.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    values[i] = samples[i].pair_sum;
    tail += samples[i].tail;
    allowance += 2.0 * samples[i].tail * samples[i].pair_sum;
  }
  PairSumEstimate out;
  out.estimate = summarize(values);
  out.target = 1.0 - m;
  out.tail_bound = tail / static_cast<double>(replicas);
  out.allowance = allowance / static_cast<double>(replicas);
  return out;
}

// ---- marks --------------------------------------------------------------

MarkSpec MarkSpec::constant(double x, double y) {
  if (!(x > 0.0) || !std::isfinite(y)) {
    throw std::invalid_argument("constant marks need X > 0 and finite Y");
  }
  MarkSpec s;
  s.family_ = MarkFamily::kConstant;
  s.a_ = x;
  s.b_ = y;
  return s;
}

MarkSpec MarkSpec::log_normal(double sigma, double rho, double shift) {
  if (!(sigma >= 0.0) || !(rho >= -1.0 && rho <= 1.0) || !(shift >= 0.0)) {
    throw std::invalid_argument(
        "log-normal marks need sigma >= 0, |rho| <= 1 and shift >= 0");
  }
  MarkSpec s;
  s.family_ = MarkFamily::kLogNormal;
  s.a_ = sigma;
  s.b_ = rho;
  s.c_ = shift;
  return s;
}

MarkSpec MarkSpec::discrete(std::vector<DiscreteAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("discrete marks: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.x > 0.0) || !std::isfinite(a.y) || !(a.probability > 0.0)) {
      throw std::invalid_argument(
          "discrete marks need X > 0, finite Y and positive probabilities");
    }
    total += a.probability;
  }
  MarkSpec s;
  s.family_ = MarkFamily::kDiscrete;
  double run = 0.0;
  for (auto& a : atoms) {
    a.probability /= total;
    run += a.probability;
    s.cumulative_.push_back(run);
  }
  s.cumulative_.back() = 1.0;
  s.atoms_ = std::move(atoms);
  return s;
}

MarkPair MarkSpec::sample(Engine& engine) const {
  switch (family_) {
    case MarkFamily::kConstant:
      return {a_, b_};
    case MarkFamily::kLogNormal: {
      const double g1 = standard_normal(engine);
      const double g2 = standard_normal(engine);
      return {c_ + std::exp(a_ * g1),
              b_ * g1 + std::sqrt(1.0 - b_ * b_) * g2};
    }
    case MarkFamily::kDiscrete: {
      const double u = engine.uniform_open();
      const auto it =
          std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto& atom = atoms_[static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                   std::ssize(atoms_) - 1))];
      return {atom.x, atom.y};
    }
  }
  return {};
}

double MarkSpec::min_x() const {
  switch (family_) {
    case MarkFamily::kConstant:
      return a_;
    case MarkFamily::kLogNormal:
      return c_;
    case MarkFamily::kDiscrete: {
      double lo = atoms_.front().x;
      for (const auto& a : atoms_) lo = std::min(lo, a.x);
      return lo;
    }
  }
  return 0.0;
}

double MarkSpec::mean_x() const {
  switch (family_) {
    case MarkFamily::kConstant:
      return a_;
    case MarkFamily::kLogNormal:
      return c_ + std::exp(0.5 * a_ * a_);
    case MarkFamily::kDiscrete: {
      double s = 0.0;
      for (const auto& a : atoms_) s += a.probability * a.x;
      return s;
    }
  }
  return 0.0;
}

double MarkSpec::mean_abs_y() const {
  switch (family_) {
    case MarkFamily::kConstant:
      return std::abs(b_);
    case MarkFamily::kLogNormal:
      return std::sqrt(2.0 / std::numbers::pi);
    case MarkFamily::kDiscrete: {
      double s = 0.0;
      for (const auto& a : atoms_) s += a.probability * std::abs(a.y);
      return s;
    }
  }
  return 0.0;
}

std::string MarkSpec::describe() const {
  std::ostringstream out;
  switch (family_) {
    case MarkFamily::kConstant:
      out << "constant(x=" << a_ << ", y=" << b_ << ")";
      break;
    case MarkFamily::kLogNormal:
      out << "log_normal(sigma=" << a_ << ", rho=" << b_ << ", shift=" << c_
          << ")";
      break;
    case MarkFamily::kDiscrete:
      out << "discrete(";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        out << (i ? "; " : "") << atoms_[i].x << "," << atoms_[i].y << "@"
            << atoms_[i].probability;
      }
      out << ")";
      break;
  }
  return out.str();
}

TiltedLaw::TiltedLaw(const MarkSpec& spec, double m, std::size_t pool_size,
                     std::uint64_t seed) {
  if (pool_size < 1) throw std::invalid_argument("empty mark pool");
  Engine engine(stream_seed(seed, Stream::kMarkPool));
  pool_.reserve(pool_size);
  cumulative_.reserve(pool_size);
  double run = 0.0;
  for (std::size_t i = 0; i < pool_size; ++i) {
    const MarkPair p = spec.sample(engine);
    pool_.push_back(p);
    run += std::pow(p.x, m);
    cumulative_.push_back(run);
  }
  mean_weight_ = spec.family() == MarkFamily::kConstant
                     ? std::pow(spec.min_x(), m)
                     : run / static_cast<double>(pool_size);
}

MarkPair TiltedLaw::sample(Engine& engine) const {
  const double target = engine.uniform_open() * cumulative_.back();
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), pool_.size() - 1);
  return pool_[idx];
}

std::string to_string(PdStatistic s) {
  switch (s) {
    case PdStatistic::kPairSum:
      return "pair_sum";
    case PdStatistic::kTopWeight:
      return "top_weight";
    case PdStatistic::kWeightedMark:
      return "weighted_mark";
    case PdStatistic::kLogTopPoint:
      return "log_top_point";
  }
  return "unknown";
}

PdStatistic parse_pd_statistic(const std::string& name) {
  for (PdStatistic s :
       {PdStatistic::kPairSum, PdStatistic::kTopWeight,
        PdStatistic::kWeightedMark, PdStatistic::kLogTopPoint}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument(
      "unknown statistic '" + name +
      "' (expected pair_sum, top_weight, weighted_mark or log_top_point)");
}

CheckRecord PairedEstimate::check(double multiplier) const {
  return check_equal(statistic, lhs, rhs, multiplier, allowance);
}

nlohmann::ordered_json to_json(const PairedEstimate& p, double multiplier) {
  const CheckRecord rec = p.check(multiplier);
  nlohmann::ordered_json j;
  j["statistic"] = p.statistic;
  j["lhs_mean"] = p.lhs.mean;
  j["lhs_se"] = p.lhs.std_error;
  j["rhs_mean"] = p.rhs.mean;
  j["rhs_se"] = p.rhs.std_error;
  j["replicas"] = p.lhs.replicas;
  j["n_max"] = p.n_max;
  j["allowance"] = p.allowance;
  j["tolerance"] = rec.tolerance;
  j["pass"] = rec.pass;
  return j;
}

std::string csv_header() {
  return "statistic,lhs_mean,lhs_se,rhs_mean,rhs_se,replicas,n_max,allowance,"
         "tolerance,pass";
}

std::string csv_row(const PairedEstimate& p, double multiplier) {
  const CheckRecord rec = p.check(multiplier);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%d",
                p.statistic.c_str(), p.lhs.mean, p.lhs.std_error, p.rhs.mean,
                p.rhs.std_error, p.lhs.replicas, p.n_max, p.allowance,
                rec.tolerance, rec.pass ? 1 : 0);
  return buf;
}

namespace {

// Statistic of a finite process with points `a` and labels `y`, together
// with the first-order change caused by adding relative mass `rho` with
// labels of mean absolute size `label_scale`.
struct Evaluated {
  double value = 0.0;
  double allowance = 0.0;
};

Evaluated evaluate(PdStatistic statistic, const std::vector<double>& a,
                   const std::vector<double>& y, double rho,
                   double label_scale) {
  const double total = sum_of(a);
  switch (statistic) {
    case PdStatistic::kPairSum: {
      double s2 = 0.0;
      for (double x : a) s2 += x * x;
      const double v = s2 / (total * total);
      return {v, 2.0 * rho * v};
    }
    case PdStatistic::kTopWeight: {
      const double v = *std::max_element(a.begin(), a.end()) / total;
      return {v, rho * v};
    }
    case PdStatistic::kWeightedMark: {
      double s = 0.0;
      for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * y[n];
      const double v = s / total;
      return {v, rho * (std::abs(v) + label_scale)};
    }
    case PdStatistic::kLogTopPoint:
      return {std::log(*std::max_element(a.begin(), a.end())), 0.0};
  }
  return {};
}

}  // namespace

PairedEstimate verify_invariance(double m, const MarkSpec& marks,
                                 PdStatistic statistic,
                                 const InvarianceOptions& options,
                                 std::uint64_t seed) {
  require_m(m);
  require_n_max(options.n_max);
  if (options.replicas < 2) throw std::invalid_argument("replicas must be >= 2");

  const TiltedLaw tilted(marks, m, options.pool_size,
                         stream_seed(seed, Stream::kModule));
  const double scale = std::pow(tilted.mean_x_pow_m(), 1.0 / m);
  const double mean_x = marks.mean_x();
  const double label_scale = marks.mean_abs_y();

  struct Sample {
    Evaluated lhs, rhs;
  };
  const auto samples =
      parallel_map<Sample>(options.replicas, [&](std::size_t i) {
        const std::uint64_t rs = replica_seed(seed, i);
        const std::vector<double> u = replica_points(m, options.n_max, rs);
        const double u_total = sum_of(u);
        const double tail = poisson_remainder(m, u.back()).mass;

        Engine mark_engine(stream_seed(rs, Stream::kPdMarks));
        Engine tilt_engine(derive_seed(stream_seed(rs, Stream::kPdMarks), 1));
        std::vector<double> a(u.size()), y(u.size()), c(u.size()),
            y_tilted(u.size());
        for (std::size_t n = 0; n < u.size(); ++n) {
          const MarkPair p = marks.sample(mark_engine);
          a[n] = u[n] * p.x;
          y[n] = p.y;
          c[n] = scale * u[n];
          y_tilted[n] = tilted.sample(tilt_engine).y;
        }
        const double rho_lhs = tail * mean_x / sum_of(a);
        const double rho_rhs = tail / u_total;
        return Sample{evaluate(statistic, a, y, rho_lhs, label_scale),
                      evaluate(statistic, c, y_tilted, rho_rhs, label_scale)};
      });

  std::vector<double> lhs(options.replicas), rhs(options.replicas);
  double allowance = 0.0;
  for (std::size_t i = 0; i < options.replicas; ++i) {
    lhs[i] = samples[i].lhs.value;
    rhs[i] = samples[i].rhs.value;
    allowance += samples[i].lhs.allowance + samples[i].rhs.allowance;
  }
  PairedEstimate out;
  out.statistic = to_string(statistic);
  out.lhs = summarize(lhs);
  out.rhs = summarize(rhs);
  out.n_max = options.n_max;
  out.allowance = allowance / static_cast<double>(options.replicas);
  return out;
}

namespace {

// Ratio of means over batches, sum(num) / sum(den), with the delta-method
// standard error from batch-level residuals num_j - R den_j.
Estimate ratio_of_means(const std::vector<double>& num,
                        const std::vector<double>& den, double factor) {
  const std::size_t nb = num.size();
  double sn = 0.0, sd = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    sn += num[j];
    sd += den[j];
  }
  const double ratio = sn / sd;
  const double mean_den = sd / static_cast<double>(nb);
  std::vector<double> resid(nb);
  for (std::size_t j = 0; j < nb; ++j) resid[j] = num[j] - ratio * den[j];
  const Estimate r = summarize(resid);
  return {factor * ratio, std::abs(factor) * r.std_error / mean_den, nb};
}

}  // namespace

std::vector<PairedEstimate> corollary_moments(double m, const MarkSpec& marks,
                                              const CorollaryOptions& options,
                                              std::uint64_t seed) {
  require_m(m);
  require_n_max(options.n_max);
  if (options.replicas < 1000) {
    throw std::invalid_argument("corollary_moments needs replicas >= 1000");
  }
  if (marks.min_x() < 1.0) {
    throw std::invalid_argument(
        "corollary_moments needs a mark family with X >= 1");
  }
  if (options.mark_batches < 2 || options.mark_batch_size < 1) {
    throw std::invalid_argument("mark Monte Carlo needs >= 2 batches");
  }

  const double mean_x = marks.mean_x();
  const double abs_y = marks.mean_abs_y();

  struct Sample {
    double v[3];
    double allow[3];
  };
  const auto samples =
      parallel_map<Sample>(options.replicas, [&](std::size_t i) {
        const std::uint64_t rs = replica_seed(seed, i);
        const std::vector<double> u = replica_points(m, options.n_max, rs);
        Engine mark_engine(stream_seed(rs, Stream::kPdMarks));
        double a = 0.0, b = 0.0, c = 0.0;
        for (double un : u) {
          const MarkPair p = marks.sample(mark_engine);
          a += un * p.y;
          b += un * p.x;
          c += un * un * p.y * p.y;
        }
        const double tail = poisson_remainder(m, u.back()).mass;
        const double rho_b = tail * mean_x / b;
        const double rho_a = tail * abs_y / b;
        Sample s{};
        s.v[0] = a / b;
        s.v[1] = c / (b * b);
        s.v[2] = (a * a - c) / (b * b);
        s.allow[0] = rho_a + rho_b * std::abs(s.v[0]);
        s.allow[1] = 2.0 * rho_b * s.v[1];
        s.allow[2] = 2.0 * rho_a * std::abs(s.v[0]) + 2.0 * rho_b * std::abs(s.v[2]);
        return s;
      });

  // Mark side: batched plain Monte Carlo over the mark distribution.
  const std::uint64_t mark_seed = stream_seed(seed, Stream::kMarkPool);
  struct Batch {
    double n1 = 0.0, n2 = 0.0, d = 0.0;
  };
  const auto batches =
      parallel_map<Batch>(options.mark_batches, [&](std::size_t j) {
        Engine engine(derive_seed(mark_seed, j));
        Batch bt;
        for (std::size_t i = 0; i < options.mark_batch_size; ++i) {
          const MarkPair p = marks.sample(engine);
          const double xm = std::pow(p.x, m);
          bt.d += xm;
          bt.n1 += xm / p.x * p.y;
          bt.n2 += xm / (p.x * p.x) * p.y * p.y;
        }
        const double inv = 1.0 / static_cast<double>(options.mark_batch_size);
        bt.d *= inv;
        bt.n1 *= inv;
        bt.n2 *= inv;
        return bt;
      });
  std::vector<double> n1(batches.size()), n2(batches.size()),
      d(batches.size());
  for (std::size_t j = 0; j < batches.size(); ++j) {
    n1[j] = batches[j].n1;
    n2[j] = batches[j].n2;
    d[j] = batches[j].d;
  }
  const Estimate r1 = ratio_of_means(n1, d, 1.0);
  const Estimate r2 = ratio_of_means(n2, d, 1.0 - m);
  const Estimate r3{m * r1.mean * r1.mean,
                    2.0 * m * std::abs(r1.mean) * r1.std_error, r1.replicas};
  const Estimate rhs[3] = {r1, r2, r3};
  const char* names[3] = {"ratio_first_moment", "ratio_diagonal",
                          "ratio_off_diagonal"};

  std::vector<PairedEstimate> out;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> v(options.replicas);
    double allowance = 0.0;
    for (std::size_t i = 0; i < options.replicas; ++i) {
      v[i] = samples[i].v[s];
      allowance += samples[i].allow[s];
    }
    PairedEstimate p;
    p.statistic = names[s];
    p.lhs = summarize(v);
    p.rhs = rhs[s];
    p.n_max = options.n_max;
    p.allowance = allowance / static_cast<double>(options.replicas);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace rsb
