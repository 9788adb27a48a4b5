#include <benchmark/benchmark.h>

#include "mxl/draws.hpp"
#include "mxl/likelihood.hpp"
#include "mxl/model_spec.hpp"
#include "mxl/scenario_gen.hpp"

namespace {

void BM_HaltonDraws(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto draws = mxl::halton_normal_draws(n, 200, 9);
    benchmark::DoNotOptimize(draws);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * 200 * 9);
}
BENCHMARK(BM_HaltonDraws)->Arg(100)->Arg(600);

void BM_LoglikGradient(benchmark::State& state) {
  const auto ref = mxl::reference_spec();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto panel = mxl::generate_panel(n, 4, ref.spec, ref.theta, 1);
  const mxl::SimulatedLikelihood ll(panel, ref.spec);
  const auto draws = mxl::halton_normal_draws(n, 100, ref.spec.n_random());
  std::vector<double> grad(ll.n_slots());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ll.loglik_grad(ref.theta, draws, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LoglikGradient)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_GeneratePanel(benchmark::State& state) {
  const auto ref = mxl::reference_spec();
  for (auto _ : state) {
    auto panel = mxl::generate_panel(600, 4, ref.spec, ref.theta, 2);
    benchmark::DoNotOptimize(panel);
  }
}
BENCHMARK(BM_GeneratePanel)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
