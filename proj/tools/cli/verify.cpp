#include "cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "cli/report.hpp"
#include "rsb/cascade.hpp"
#include "rsb/interpolation.hpp"
#include "rsb/parallel.hpp"
#include "rsb/pd_process.hpp"
#include "rsb/random.hpp"
#include "rsb/recursion.hpp"
#include "rsb/sk_model.hpp"

namespace rsb::cli {
namespace {

struct Sizes {
  std::size_t pd_n_max;
  std::size_t pd_replicas;
  CorollaryOptions corollary;
  InvarianceOptions invariance;
  int cascade_branching;
  std::size_t cascade_replicas;
  MarkedOptions marked;
  int sk_sites;
  std::size_t sk_replicas;
  int interp_branching;
  std::size_t derivative_replicas;
  std::size_t gibbs_replicas;
  std::size_t error_replicas;
  /// Criteria re-run under two worker counts for the determinism check.
  std::vector<int> determinism_subset;
};

Sizes desk_sizes() {
  Sizes s;
  s.pd_n_max = 100000;
  s.pd_replicas = 5000;
  s.corollary = {5000, 2000, 200, 5000};
  s.invariance = {2000, 2000, 200000};
  s.cascade_branching = 200;
  s.cascade_replicas = 2000;
  s.marked = {2000, 100, 40, {}};
  s.sk_sites = 10;
  s.sk_replicas = 2000;
  s.interp_branching = 50;
  s.derivative_replicas = 4000;
  s.gibbs_replicas = 2000;
  s.error_replicas = 2000;
  s.determinism_subset = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  return s;
}

Sizes smoke_sizes() {
  Sizes s;
  s.pd_n_max = 10000;
  s.pd_replicas = 500;
  s.corollary = {1000, 500, 20, 2000};
  s.invariance = {300, 500, 20000};
  s.cascade_branching = 50;
  s.cascade_replicas = 300;
  s.marked = {300, 30, 24, {}};
  s.sk_sites = 6;
  s.sk_replicas = 300;
  s.interp_branching = 20;
  s.derivative_replicas = 300;
  s.gibbs_replicas = 300;
  s.error_replicas = 300;
  s.determinism_subset = {1, 4, 9};
  return s;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

CheckRecord renamed(CheckRecord c, std::string name) {
  c.name = std::move(name);
  return c;
}

/// lhs < rhs strictly, on exactly computed values.
CheckRecord strictly_below(std::string name, double lhs, double rhs) {
  CheckRecord c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.one_sided = true;
  c.pass = lhs < rhs;
  return c;
}

SystemConfig interpolation_system(int b, double m2) {
  SystemConfig cfg;
  cfg.n_sites = 4;
  cfg.mixture = MixtureFunction::sk(0.5);
  cfg.rsb = RSBParams({0.4, m2}, {0.3, 0.7});
  cfg.branching = b;
  cfg.h = 0.3;
  return cfg;
}

MarkSpec lognormal_marks(double shift) { return MarkSpec::log_normal(0.5, 0.6, shift); }
MarkSpec two_point_marks() { return MarkSpec::discrete({{1.0, 1.0, 0.5}, {2.0, -1.0, 0.5}}); }

std::vector<CheckRecord> determinism(const std::string& preset,
                                     const std::vector<int>& subset,
                                     std::uint64_t seed, double multiplier) {
  const std::size_t saved = worker_count();
  std::string first, second;
  try {
    set_worker_count(1);
    first = fingerprint(run_verify_all(preset, seed, multiplier, {}, subset));
    set_worker_count(3);
    second = fingerprint(run_verify_all(preset, seed, multiplier, {}, subset));
  } catch (...) {
    set_worker_count(saved);
    throw;
  }
  set_worker_count(saved);
  CheckRecord c;
  c.name = "identical_records_workers_1_vs_3";
  c.lhs = static_cast<double>(fnv1a64(first));
  c.rhs = static_cast<double>(fnv1a64(second));
  c.pass = first == second && !first.empty();
  return {c};
}

}  // namespace

bool CriterionResult::pass() const {
  if (records.empty()) return false;
  for (const auto& r : records) {
    if (!r.pass) return false;
  }
  return true;
}

std::uint64_t criterion_seed(std::uint64_t seed, int id) {
  return derive_seed(stream_seed(seed, Stream::kModule),
                     static_cast<std::uint64_t>(id));
}

std::vector<Criterion> acceptance_matrix(const std::string& preset) {
  if (preset != "desk" && preset != "smoke") {
    throw std::invalid_argument("unknown preset '" + preset + "'");
  }
  const Sizes s = preset == "desk" ? desk_sizes() : smoke_sizes();
  std::vector<Criterion> out;

  out.push_back({1, "PD pair-sum E sum w^2 = 1 - m", 60.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   std::uint64_t label = 0;
                   for (double m : {0.3, 0.5, 0.7}) {
                     const auto e = estimate_pair_sum(m, s.pd_n_max, s.pd_replicas,
                                                      derive_seed(seed, label++));
                     recs.push_back(check_equal(fmt("pair_sum_m%.1f", m), e.estimate,
                                                exact(e.target), mult, e.allowance));
                   }
                   return recs;
                 }});

  out.push_back({2, "ratio identities for marked PD processes", 120.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const std::pair<const char*, MarkSpec> families[] = {
                       {"log_normal", lognormal_marks(1.0)},
                       {"two_point", two_point_marks()}};
                   std::uint64_t label = 0;
                   for (const auto& [name, marks] : families) {
                     for (const auto& p : corollary_moments(0.5, marks, s.corollary,
                                                            derive_seed(seed, label++))) {
                       recs.push_back(renamed(p.check(mult), std::string(name) + "_" + p.statistic));
                     }
                   }
                   return recs;
                 }});

  out.push_back({3, "tilted-mark invariance of PD processes", 120.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const std::pair<const char*, MarkSpec> families[] = {
                       {"log_normal", lognormal_marks(0.0)},
                       {"two_point", two_point_marks()}};
                   std::uint64_t label = 0;
                   for (const auto& [name, marks] : families) {
                     for (PdStatistic st : {PdStatistic::kPairSum, PdStatistic::kTopWeight,
                                            PdStatistic::kWeightedMark,
                                            PdStatistic::kLogTopPoint}) {
                       const auto p = verify_invariance(0.5, marks, st, s.invariance,
                                                        derive_seed(seed, label++));
                       recs.push_back(renamed(p.check(mult), std::string(name) + "_" + p.statistic));
                     }
                   }
                   return recs;
                 }});

  out.push_back({4, "cascade overlap masses", 120.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const RSBParams rsb({0.4, 0.8}, {0.3, 0.6});
                   for (const auto& e : overlap_mass_table(rsb, s.cascade_branching,
                                                           s.cascade_replicas, seed)) {
                     recs.push_back(e.check(mult));
                   }
                   return recs;
                 }});

  out.push_back({5, "log-partition identity against the recursion", 120.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const RSBParams k1({0.5}, {0.5});
                   const RSBParams k2({0.4, 0.8}, {0.3, 0.6});
                   std::uint64_t label = 0;
                   for (const RSBParams* rsb : {&k1, &k2}) {
                     const auto vars = default_mark_variances(rsb->k());
                     for (const auto& x : {PathFunctional::linear({1.0, 1.0, 1.0}),
                                           PathFunctional::log_cosh(0.3)}) {
                       const auto e = log_partition_identity(*rsb, vars, x, s.marked,
                                                             derive_seed(seed, label++));
                       recs.push_back(renamed(e.check(mult),
                                              "k" + std::to_string(rsb->k()) + "_" + e.name));
                     }
                   }
                   return recs;
                 }});

  out.push_back({6, "tilted averages against the W-product references", 180.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const RSBParams rsb({0.4, 0.8}, {0.3, 0.6});
                   const auto vars = default_mark_variances(2);
                   const auto lin = PathFunctional::linear({0.5, 1.0, 1.0});
                   const auto quad = PathFunctional::quadratic({0.0, 0.5, 0.5}, 0.1);
                   std::uint64_t label = 0;
                   auto add = [&](const PathFunctional& x, const TiltedObservable& y,
                                  std::optional<int> r) {
                     recs.push_back(tilted_average(rsb, vars, x, y, r, s.marked,
                                                   derive_seed(seed, label++))
                                        .check(mult));
                   };
                   add(lin, PathFunctional::linear({0.0, 1.0, 1.0}), std::nullopt);
                   add(quad, PathFunctional::quadratic({0.0, 1.0, 0.0}, 0.2), std::nullopt);
                   for (int r : {1, 2}) {
                     add(lin, PairFunctional::level_mark_product({0.0, 1.0, 1.0}), r);
                     add(quad, PairFunctional::product(PathFunctional::linear({0.0, 1.0, 1.0}, 1.0)), r);
                   }
                   return recs;
                 }});

  out.push_back({7, "free energy below the optimized bound", 300.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   double k2_at_strong = 0.0;
                   std::uint64_t label = 0;
                   for (double beta : {0.6, 1.5}) {
                     for (double h : {0.0, 0.3}) {
                       const auto rep = verify_bound(s.sk_sites, MixtureFunction::sk(beta), h,
                                                     std::nullopt, 2, s.sk_replicas, {},
                                                     derive_seed(seed, label++), mult);
                       recs.push_back(renamed(rep.check, fmt("beta%.1f", beta) +
                                                             fmt("_h%.1f_free_energy_below_k2_bound", h)));
                       if (beta == 1.5 && h == 0.0) k2_at_strong = rep.bound;
                     }
                   }
                   const auto k1 = optimize_bound(MixtureFunction::sk(1.5), 0.0, 1);
                   recs.push_back(strictly_below("beta1.5_h0.0_k2_bound_below_k1_bound",
                                                 k2_at_strong, k1.bound));
                   return recs;
                 }});

  out.push_back({8, "replica-symmetric closed form", 30.0,
                 [](std::uint64_t, double mult) {
                   const double beta = 0.4;
                   const auto res = optimize_bound(MixtureFunction::sk(beta), 0.0, 1);
                   return std::vector<CheckRecord>{
                       check_equal("optimized_k1_bound_vs_log2_plus_beta2_over_4",
                                   exact(res.bound),
                                   exact(std::log(2.0) + beta * beta / 4.0), mult, 1e-3)};
                 }});

  out.push_back({9, "interpolation derivative formula", 300.0,
                 [s](std::uint64_t seed, double mult) {
                   const auto cfg = interpolation_system(s.interp_branching, 0.95);
                   return std::vector<CheckRecord>{
                       derivative_check(cfg, 0.5, 0.02, s.derivative_replicas, seed, mult).check};
                 }});

  out.push_back({10, "overlap masses under the Gibbs measure", 180.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   std::uint64_t label = 0;
                   for (double m2 : {0.8, 0.95}) {
                     const auto cfg = interpolation_system(s.interp_branching, m2);
                     const std::uint64_t cs = derive_seed(seed, label++);
                     std::vector<std::vector<OverlapMassEstimate>> by_t;
                     for (double t : {0.1, 0.9}) {
                       by_t.push_back(gibbs_overlap_masses(cfg, t, s.gibbs_replicas, cs));
                       for (const auto& e : by_t.back()) {
                         recs.push_back(renamed(e.check(mult), fmt("m2_%.2f", m2) + fmt("_t%.1f_", t) +
                                                                   "gibbs_overlap_r" + std::to_string(e.r)));
                       }
                     }
                     for (std::size_t i = 0; i < by_t[0].size(); ++i) {
                       recs.push_back(check_equal(
                           fmt("m2_%.2f_t_independence_r", m2) + std::to_string(i + 1),
                           by_t[0][i].estimate, by_t[1][i].estimate, mult,
                           by_t[0][i].allowance + by_t[1][i].allowance));
                     }
                   }
                   return recs;
                 }});

  out.push_back({11, "error-term factorization and the coupled system", 300.0,
                 [s](std::uint64_t seed, double mult) {
                   std::vector<CheckRecord> recs;
                   const auto cfg = interpolation_system(s.interp_branching, 0.95);
                   for (int r : {1, 2}) {
                     recs.push_back(error_term_check(cfg, 0.5, r, s.error_replicas,
                                                     derive_seed(seed, static_cast<std::uint64_t>(r)),
                                                     false, mult)
                                        .check);
                   }
                   SystemConfig one = cfg;
                   one.n_sites = 1;
                   for (int r : {1, 2}) {
                     const std::string tag = "_N1_r" + std::to_string(r);
                     const auto mu = mu_r_quadrature(1, one.mixture, one.rsb, one.h, 0.5, r,
                                                     ReplicaObservable::kDelta);
                     const auto mc = coupled_average(one, 0.5, r, ReplicaObservable::kDelta,
                                                     s.error_replicas,
                                                     derive_seed(seed, 10 + static_cast<std::uint64_t>(r)));
                     recs.push_back(check_equal("coupled_mc_vs_mu_quadrature" + tag, mc.average,
                                                exact(mu.w_form / mu.normalization), mult,
                                                mc.allowance));
                     recs.push_back(check_equal("v_form_vs_w_form" + tag, exact(mu.v_form),
                                                exact(mu.w_form), mult, 1e-8));
                     recs.push_back(check_at_most("max_v_minus_w1w2" + tag,
                                                  exact(mu.max_factor_gap), exact(0.0), mult,
                                                  1e-8));
                     const auto one_mu = mu_r_quadrature(1, one.mixture, one.rsb, one.h, 0.5, r,
                                                         ReplicaObservable::kOne);
                     recs.push_back(check_equal("mu_of_one" + tag, exact(one_mu.w_form),
                                                exact(1.0), mult, 1e-8));
                   }
                   return recs;
                 }});

  const std::vector<int> subset = s.determinism_subset;
  out.push_back({12, "determinism across worker counts", 1e9,
                 [subset](std::uint64_t seed, double mult) {
                   return determinism("smoke", subset, seed, mult);
                 }});
  return out;
}

std::vector<CriterionResult> run_verify_all(const std::string& preset,
                                            std::uint64_t seed,
                                            double multiplier,
                                            const Progress& progress,
                                            const std::vector<int>& only) {
  std::vector<CriterionResult> results;
  for (const auto& c : acceptance_matrix(preset)) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    res.id = c.id;
    res.title = c.title;
    res.limit_seconds = c.limit_seconds;
    res.records = c.run(criterion_seed(seed, c.id), multiplier);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (progress) progress(res);
    results.push_back(std::move(res));
  }
  return results;
}

std::string fingerprint(const std::vector<CriterionResult>& results) {
  std::string out;
  char buf[512];
  for (const auto& res : results) {
    for (const auto& r : res.records) {
      std::snprintf(buf, sizeof buf, "%d|%s|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d\n",
                    res.id, r.name.c_str(), r.lhs, r.lhs_se, r.rhs, r.rhs_se,
                    r.allowance, r.tolerance, r.pass ? 1 : 0);
      out += buf;
    }
  }
  return out;
}

}  // namespace rsb::cli
