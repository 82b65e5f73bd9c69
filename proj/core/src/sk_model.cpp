#include "rsb/sk_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsb/parallel.hpp"
#include "rsb/random.hpp"

namespace rsb {
namespace {

// In-place Walsh-Hadamard transform: out[c] = sum_mask in[mask] (-1)^|mask & c|.
void walsh_hadamard(std::vector<double>& a) {
  for (std::size_t len = 1; len < a.size(); len <<= 1) {
    for (std::size_t i = 0; i < a.size(); i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double x = a[j];
        const double y = a[j + len];
        a[j] = x + y;
        a[j + len] = x - y;
      }
    }
  }
}

}  // namespace

HamiltonianTable sample_hamiltonian(int n_sites, const MixtureFunction& mix,
                                    std::uint64_t seed) {
  if (n_sites < 1 || n_sites > kMaxEnumeratedSites) {
    throw std::invalid_argument("enumeration supports 1 <= N <= 14");
  }
  if (mix.max_degree() > 4) {
    throw std::invalid_argument("Hamiltonian synthesis supports p <= 4");
  }
  HamiltonianTable table;
  table.n_ = n_sites;
  const std::size_t configs = std::size_t{1} << n_sites;
  std::vector<double> walsh(configs, 0.0);
  Engine engine(stream_seed(seed, Stream::kHamiltonian));
  const double n = n_sites;

  for (const MixtureTerm& term : mix.terms()) {
    const int p = term.p;
    const double scale = term.beta * std::pow(n, -(p - 1) / 2.0);
    std::size_t count = 1;
    for (int j = 0; j < p; ++j) count *= static_cast<std::size_t>(n_sites);
    std::vector<double> g(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      g[idx] = standard_normal(engine);
      unsigned mask = 0;
      std::size_t rest = idx;
      for (int j = 0; j < p; ++j) {
        mask ^= 1u << (rest % static_cast<std::size_t>(n_sites));
        rest /= static_cast<std::size_t>(n_sites);
      }
      walsh[mask] += scale * g[idx];
    }
    table.coefficients_.push_back(std::move(g));
  }
  walsh_hadamard(walsh);
  table.values_ = std::move(walsh);
  return table;
}

double log_partition(const HamiltonianTable& table, double h) {
  const int n = table.n_sites();
  double top = -std::numeric_limits<double>::infinity();
  const auto values = table.values();
  std::vector<double> e(values.size());
  for (unsigned c = 0; c < values.size(); ++c) {
    e[c] = values[c] + h * magnetization(c, n);
    top = std::max(top, e[c]);
  }
  double s = 0.0;
  for (double x : e) s += std::exp(x - top);
  return top + std::log(s);
}

FreeEnergyEstimate exact_free_energy(int n_sites, const MixtureFunction& mix,
                                     double h, std::size_t disorder_replicas,
                                     std::uint64_t seed) {
  if (disorder_replicas < 200) {
    throw std::invalid_argument("exact_free_energy needs >= 200 replicas");
  }
  FreeEnergyEstimate out;
  out.n_sites = n_sites;
  out.replicas = disorder_replicas;
  out.log_partitions =
      parallel_map<double>(disorder_replicas, [&](std::size_t i) {
        return log_partition(
            sample_hamiltonian(n_sites, mix, replica_seed(seed, i)), h);
      });
  std::vector<double> per_site(out.log_partitions);
  for (double& x : per_site) x /= n_sites;
  out.free_energy = summarize(per_site);
  return out;
}

nlohmann::ordered_json to_json(const FreeEnergyEstimate& f) {
  nlohmann::ordered_json j;
  j["N"] = f.n_sites;
  j["F_mean"] = f.free_energy.mean;
  j["F_se"] = f.free_energy.std_error;
  j["replicas"] = f.replicas;
  return j;
}

BoundReport verify_bound(int n_sites, const MixtureFunction& mix, double h,
                         const std::optional<RSBParams>& rsb, int optimize_k,
                         std::size_t disorder_replicas,
                         const QuadratureSpec& quad, std::uint64_t seed,
                         double multiplier) {
  BoundReport report;
  report.free_energy =
      exact_free_energy(n_sites, mix, h, disorder_replicas, seed);
  if (rsb) {
    report.params = *rsb;
    const BoundResult b = guerra_bound(*rsb, mix, h, quad);
    report.bound = b.bound;
    report.phi0 = b.phi0;
  } else {
    const OptimizeResult opt = optimize_bound(mix, h, optimize_k, quad);
    report.params = opt.params;
    report.bound = opt.bound;
    report.phi0 = phi0_value(opt.params, mix, h, quad.nodes_per_level);
    report.optimized = true;
  }
  report.margin = report.bound - report.free_energy.free_energy.mean;
  const double rounding =
      64 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(report.bound));
  report.check =
      check_at_most("free_energy_below_bound_N" + std::to_string(n_sites),
                    report.free_energy.free_energy, exact(report.bound),
                    multiplier, rounding);
  return report;
}

}  // namespace rsb
