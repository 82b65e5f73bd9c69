#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "rsb/cascade.hpp"
#include "rsb/interpolation.hpp"
#include "rsb/pd_process.hpp"
#include "rsb/recursion.hpp"
#include "rsb/sk_model.hpp"

namespace rsb::cli {
namespace {

using json = nlohmann::ordered_json;

std::string row(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += json(v).dump();  // shortest round-trip form
  }
  return out;
}

json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"se", e.std_error}, {"replicas", e.replicas}};
}

json params_json(const RSBParams& p) {
  return {{"m", p.m_inner()}, {"q", p.q_inner()}};
}

PathFunctional menu_functional(const RunConfig& c, int k) {
  const auto ones = std::vector<double>(static_cast<std::size_t>(k) + 1, 1.0);
  if (c.functional == "constant") return PathFunctional::constant(1.0);
  if (c.functional == "linear") return PathFunctional::linear(ones);
  if (c.functional == "quadratic") {
    return PathFunctional::quadratic(std::vector<double>(ones.size(), 0.5), 0.1);
  }
  return PathFunctional::log_cosh(c.h);
}

std::vector<double> level_weights(int k) {
  std::vector<double> w(static_cast<std::size_t>(k) + 1, 1.0);
  w[0] = 0.0;
  return w;
}

SystemConfig system_config(const RunConfig& c) {
  SystemConfig s;
  s.n_sites = c.n_sites;
  s.mixture = c.mixture;
  s.rsb = *c.rsb;
  s.branching = c.branching;
  s.h = c.h;
  s.cascade.leaf_remainder = c.remainder;
  return s;
}

void add_paired(RunOutput& out, const PairedEstimate& p, double mult) {
  out.report.add(p.check(mult));
  out.report.results["estimates"].push_back(to_json(p, mult));
  out.series->rows.push_back(csv_row(p, mult));
}

void run_pd(const RunConfig& c, const std::string& check, RunOutput& out) {
  const double mult = c.tolerance_multiplier;
  if (check == "pair-sum") {
    const auto e = estimate_pair_sum(c.pd_m, c.n_max, c.replicas, c.seed);
    out.report.add(check_equal("pair_sum", e.estimate, exact(e.target), mult, e.allowance));
    out.report.results = {{"m", c.pd_m},
                          {"n_max", c.n_max},
                          {"estimate", estimate_json(e.estimate)},
                          {"target", e.target},
                          {"tail_bound", e.tail_bound},
                          {"allowance", e.allowance}};
    out.series = Series{"m,n_max,replicas,mean,se,target,allowance", {}};
    out.series->rows.push_back(row({c.pd_m, static_cast<double>(c.n_max),
                                    static_cast<double>(c.replicas), e.estimate.mean,
                                    e.estimate.std_error, e.target, e.allowance}));
    return;
  }
  const MarkSpec marks = parse_marks(c.marks);
  out.report.results = {{"m", c.pd_m}, {"marks", marks.describe()},
                        {"estimates", json::array()}};
  out.series = Series{csv_header(), {}};
  if (check == "invariance") {
    InvarianceOptions opt;
    opt.replicas = c.replicas;
    opt.n_max = c.n_max;
    add_paired(out, verify_invariance(c.pd_m, marks, parse_pd_statistic(c.statistic), opt, c.seed),
               mult);
    return;
  }
  CorollaryOptions opt;
  opt.replicas = c.replicas;
  opt.n_max = c.n_max;
  for (const auto& p : corollary_moments(c.pd_m, marks, opt, c.seed)) add_paired(out, p, mult);
}

json identity_json(const IdentityEstimate& e) {
  return {{"name", e.name}, {"mc", estimate_json(e.mc)}, {"reference", e.reference},
          {"allowance", e.allowance}};
}

void run_cascade(const RunConfig& c, const std::string& check, RunOutput& out) {
  const double mult = c.tolerance_multiplier;
  const RSBParams& rsb = *c.rsb;
  CascadeOptions copt;
  copt.leaf_remainder = c.remainder;
  out.report.results["params"] = params_json(rsb);
  out.report.results["branching"] = c.branching;
  if (check == "overlap") {
    out.series = Series{"r,mean,se,target,allowance", {}};
    json table = json::array();
    for (const auto& e : overlap_mass_table(rsb, c.branching, c.replicas, c.seed, copt)) {
      out.report.add(e.check(mult));
      table.push_back({{"r", e.r}, {"estimate", estimate_json(e.estimate)},
                       {"target", e.target}, {"allowance", e.allowance}});
      out.series->rows.push_back(row({static_cast<double>(e.r), e.estimate.mean,
                                      e.estimate.std_error, e.target, e.allowance}));
    }
    out.report.results["overlap_masses"] = std::move(table);
    return;
  }
  if (check == "snapshot") {
    out.report.results["snapshot"] = snapshot(build_cascade(rsb, c.branching, c.seed, copt));
    return;
  }
  MarkedOptions mopt;
  mopt.replicas = c.replicas;
  mopt.branching = c.branching;
  mopt.nodes = c.quad_nodes;
  mopt.cascade = copt;
  const auto vars = default_mark_variances(rsb.k());
  const auto x = menu_functional(c, rsb.k());
  if (check == "tilt-invariance") {
    const auto st = parse_pd_statistic(c.statistic);
    if (st != PdStatistic::kPairSum && st != PdStatistic::kTopWeight) {
      throw ConfigError("tilt-invariance supports pair_sum and top_weight");
    }
    const auto p = tilt_invariance(rsb, vars, x,
                                   st == PdStatistic::kPairSum ? CascadeStatistic::kPairSum
                                                               : CascadeStatistic::kTopWeight,
                                   mopt, c.seed);
    out.report.add(p.check(mult));
    out.report.results["estimate"] = to_json(p, mult);
    return;
  }
  IdentityEstimate e;
  if (check == "log-partition") {
    e = log_partition_identity(rsb, vars, x, mopt, c.seed);
  } else if (check == "tilted") {
    auto coeffs = level_weights(rsb.k());
    e = tilted_average(rsb, vars, x, PathFunctional::linear(coeffs), std::nullopt, mopt, c.seed);
  } else {
    e = tilted_average(rsb, vars, x, PairFunctional::level_mark_product(level_weights(rsb.k())),
                       c.r, mopt, c.seed);
  }
  out.report.add(e.check(mult));
  out.report.results["identity"] = identity_json(e);
}

void run_bound(const RunConfig& c, RunOutput& out) {
  if (!c.q_grid.empty()) {
    out.series = Series{"q1,bound,phi0", {}};
    json scan = json::array();
    double best = 0.0, best_q = 0.0;
    for (std::size_t i = 0; i < c.q_grid.size(); ++i) {
      const double q = c.q_grid[i];
      const auto b = guerra_bound(RSBParams({1.0}, {q}), c.mixture, c.h, {c.quad_nodes, false});
      scan.push_back({{"q1", q}, {"bound", b.bound}, {"phi0", b.phi0}});
      out.series->rows.push_back(row({q, b.bound, b.phi0}));
      if (i == 0 || b.bound < best) {
        best = b.bound;
        best_q = q;
      }
    }
    out.report.results = {{"scan", std::move(scan)}, {"argmin_q1", best_q}, {"min_bound", best}};
    return;
  }
  const auto b = guerra_bound(*c.rsb, c.mixture, c.h, {c.quad_nodes, true});
  out.report.results = {{"phi0", b.phi0},
                        {"bound", b.bound},
                        {"params", params_json(*c.rsb)},
                        {"quad_nodes", b.quad_nodes},
                        {"converged", b.converged},
                        {"refinement_change", b.refinement_change}};
}

void run_optimize(const RunConfig& c, RunOutput& out) {
  const auto res = optimize_bound(c.mixture, c.h, c.k, {c.quad_nodes, false});
  out.report.results = {{"k", c.k},
                        {"params", params_json(res.params)},
                        {"bound", res.bound},
                        {"converged", res.converged},
                        {"evaluations", res.evaluations},
                        {"restart_values", res.restart_values}};
}

void run_sk(const RunConfig& c, const std::string& check, RunOutput& out) {
  if (check == "bound") {
    std::optional<RSBParams> rsb;
    if (c.rsb && c.rsb->guerra_endpoint()) rsb = c.rsb;
    const auto rep = verify_bound(c.n_sites, c.mixture, c.h, rsb, c.k, c.replicas,
                                  {c.quad_nodes, false}, c.seed, c.tolerance_multiplier);
    out.report.add(rep.check);
    out.report.results = {{"free_energy", to_json(rep.free_energy)},
                          {"bound", rep.bound},
                          {"phi0", rep.phi0},
                          {"params", params_json(rep.params)},
                          {"optimized", rep.optimized},
                          {"margin", rep.margin}};
    return;
  }
  const auto f = exact_free_energy(c.n_sites, c.mixture, c.h, c.replicas, c.seed);
  out.report.results = to_json(f);
  out.series = Series{"replica,log_partition", {}};
  for (std::size_t i = 0; i < f.log_partitions.size(); ++i) {
    out.series->rows.push_back(row({static_cast<double>(i), f.log_partitions[i]}));
  }
}

void run_interpolate(const RunConfig& c, const std::string& check, RunOutput& out) {
  const double mult = c.tolerance_multiplier;
  const SystemConfig sys = system_config(c);
  out.report.results["params"] = params_json(sys.rsb);
  if (check == "phi") {
    const std::vector<double> grid = c.t_grid.empty() ? std::vector<double>{c.t} : c.t_grid;
    out.series = Series{"t,phi_mean,phi_se,allowance", {}};
    json values = json::array();
    for (double t : grid) {
      const auto p = phi_t(sys, t, c.replicas, c.seed);
      values.push_back({{"t", t}, {"phi", estimate_json(p.phi)}, {"allowance", p.allowance}});
      out.series->rows.push_back(row({t, p.phi.mean, p.phi.std_error, p.allowance}));
      if (t == 0.0) {
        const auto rec = phi0(sys.rsb, sys.mixture, sys.h, {c.quad_nodes, false});
        out.report.add(check_equal("phi_t0_vs_recursion", p.phi, exact(rec.phi0), mult,
                                   p.allowance));
      }
      if (t == 1.0) {
        const std::size_t reps = std::max<std::size_t>(c.replicas, 200);
        const auto f = exact_free_energy(sys.n_sites, sys.mixture, sys.h, reps, c.seed);
        out.report.add(check_equal("phi_t1_vs_enumeration", p.phi, f.free_energy, mult,
                                   p.allowance));
      }
    }
    out.report.results["phi"] = std::move(values);
    return;
  }
  if (check == "derivative") {
    const auto d = derivative_check(sys, c.t, 0.02, c.replicas, c.seed, mult);
    out.report.add(d.check);
    out.report.results["t"] = d.t;
    out.report.results["delta"] = d.delta;
    out.report.results["numeric"] = estimate_json(d.numeric);
    out.report.results["theta_one"] = d.theta_one;
    out.report.results["theta_term"] = estimate_json(d.theta_term);
    out.report.results["delta_term"] = estimate_json(d.delta_term);
    out.report.results["formula"] = estimate_json(d.formula);
    out.report.results["allowance"] = d.allowance;
    return;
  }
  if (check == "overlap") {
    out.series = Series{"r,mean,se,target,allowance", {}};
    json table = json::array();
    for (const auto& e : gibbs_overlap_masses(sys, c.t, c.replicas, c.seed)) {
      out.report.add(e.check(mult));
      table.push_back({{"r", e.r}, {"estimate", estimate_json(e.estimate)},
                       {"target", e.target}, {"allowance", e.allowance}});
      out.series->rows.push_back(row({static_cast<double>(e.r), e.estimate.mean,
                                      e.estimate.std_error, e.target, e.allowance}));
    }
    out.report.results["t"] = c.t;
    out.report.results["overlap_masses"] = std::move(table);
    return;
  }
  const auto e = error_term_check(sys, c.t, c.r, c.replicas, c.seed, sys.n_sites <= 2, mult);
  out.report.add(e.check);
  out.report.results["t"] = e.t;
  out.report.results["r"] = e.r;
  out.report.results["lhs"] = estimate_json(e.lhs);
  out.report.results["rhs"] = estimate_json(e.rhs);
  out.report.results["allowance"] = e.allowance;
  if (e.quadrature) out.report.results["quadrature"] = *e.quadrature;
}

void run_verify(const RunConfig& c, const Progress& progress, RunOutput& out) {
  out.criteria = run_verify_all(c.preset, c.seed, c.tolerance_multiplier, progress);
  json criteria = json::array();
  for (const auto& res : out.criteria) {
    for (const auto& r : res.records) out.report.add(r, res.id);
    criteria.push_back({{"id", res.id}, {"title", res.title}, {"pass", res.pass()},
                        {"records", res.records.size()}});
  }
  out.report.results = {{"preset", c.preset}, {"criteria", std::move(criteria)}};
}

}  // namespace

std::string Series::text() const {
  std::string out = header + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

RunOutput run(const RunConfig& config, const Progress& progress) {
  RunOutput out;
  const std::string check = effective_check(config);
  out.report.command = config.command;
  out.report.check = check;
  // Output destinations do not change the numbers, so they stay out of the hash.
  RunConfig hashed = config;
  hashed.output.clear();
  hashed.csv.clear();
  out.report.config_text = serialize_config(hashed);
  out.report.seed = config.seed;
  if (config.command == "pd") {
    run_pd(config, check, out);
  } else if (config.command == "cascade") {
    run_cascade(config, check, out);
  } else if (config.command == "bound") {
    run_bound(config, out);
  } else if (config.command == "optimize") {
    run_optimize(config, out);
  } else if (config.command == "sk-exact") {
    run_sk(config, check, out);
  } else if (config.command == "interpolate") {
    run_interpolate(config, check, out);
  } else if (config.command == "verify-all") {
    run_verify(config, progress, out);
  } else {
    throw ConfigError("unknown command '" + config.command + "'");
  }
  return out;
}

std::optional<Series> emit_series(const RunConfig& config) { return run(config).series; }

}  // namespace rsb::cli
