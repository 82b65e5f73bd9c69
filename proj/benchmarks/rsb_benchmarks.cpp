#include <benchmark/benchmark.h>

#include "rsb/cascade.hpp"
#include "rsb/interpolation.hpp"
#include "rsb/pd_process.hpp"
#include "rsb/recursion.hpp"
#include "rsb/sk_model.hpp"

namespace {

void BM_SamplePd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rsb::sample_pd(0.5, n, seed++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SamplePd)->Arg(1000)->Arg(100000);

void BM_BuildCascade(benchmark::State& state) {
  const rsb::RSBParams params({0.4, 0.8}, {0.3, 0.6});
  const int b = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rsb::build_cascade(params, b, seed++));
  state.SetItemsProcessed(state.iterations() * b * b);
}
BENCHMARK(BM_BuildCascade)->Arg(50)->Arg(200);

void BM_Phi0(benchmark::State& state) {
  const auto mix = rsb::MixtureFunction::sk(1.5);
  const int k = static_cast<int>(state.range(0));
  const rsb::RSBParams params = k == 1 ? rsb::RSBParams({1.0}, {0.5})
                                       : rsb::RSBParams({0.4, 1.0}, {0.3, 0.7});
  for (auto _ : state) benchmark::DoNotOptimize(rsb::phi0_value(params, mix, 0.3, 40));
}
BENCHMARK(BM_Phi0)->Arg(1)->Arg(2);

void BM_BuildSystem(benchmark::State& state) {
  rsb::SystemConfig config;
  config.n_sites = 4;
  config.branching = static_cast<int>(state.range(0));
  config.h = 0.3;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rsb::build_system(config, 0.5, seed++));
}
BENCHMARK(BM_BuildSystem)->Arg(20)->Arg(50);

void BM_SampleHamiltonian(benchmark::State& state) {
  const auto mix = rsb::MixtureFunction::sk(1.0);
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rsb::sample_hamiltonian(n, mix, seed++));
}
BENCHMARK(BM_SampleHamiltonian)->Arg(10)->Arg(14);

}  // namespace
BENCHMARK_MAIN();
