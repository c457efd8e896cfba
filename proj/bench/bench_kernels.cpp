// OpenMP ensemble against its serial reference, and the dealiased
// product against the direct convolution it replaces.

#include <benchmark/benchmark.h>

#include <vector>

#include "bo/random_forcing.hpp"
#include "bo/spectral.hpp"

namespace {

namespace rf = bo::random_forcing;

rf::EnsembleConfig ensemble_config(int workers) {
  rf::EnsembleConfig ens;
  ens.n_periods = 4;
  ens.trials = 16;
  ens.M = 10.0;
  ens.base_seed = 1;
  ens.workers = workers;
  return ens;
}

std::vector<bo::SpectralField> starts(const bo::TorusGrid& g) { return {bo::SpectralField::sin_mode(g, 1, 0.1)}; }

void BM_EnsembleSerial(benchmark::State& state) {
  const bo::TorusGrid g(static_cast<int>(state.range(0)));
  const rf::NoiseModel model(0.5);
  const auto ens = ensemble_config(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rf::run_ensemble_serial(starts(g), model, ens, bo::IntegratorConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * ens.trials);
}

void BM_EnsembleParallel(benchmark::State& state) {
  const bo::TorusGrid g(static_cast<int>(state.range(0)));
  const rf::NoiseModel model(0.5);
  const auto ens = ensemble_config(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rf::run_ensemble(starts(g), model, ens, bo::IntegratorConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * ens.trials);
}

bo::SpectralField dense(const bo::TorusGrid& g, int seed) {
  bo::SpectralField f(g);
  for (int k = 1; k <= g.mode_cutoff(); ++k) {
    f[k] = bo::Complex(1.0 / (k + seed), -0.5 / (k * k + seed));
    f[-k] = std::conj(f[k]);
  }
  return f;
}

void BM_DealiasedProduct(benchmark::State& state) {
  const bo::TorusGrid g(static_cast<int>(state.range(0)));
  const auto f = dense(g, 1);
  const auto h = dense(g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(bo::spectral::dealiased_product(f, h));
}

void BM_ConvolutionProduct(benchmark::State& state) {
  const bo::TorusGrid g(static_cast<int>(state.range(0)));
  const auto f = dense(g, 1);
  const auto h = dense(g, 2);
  for (auto _ : state) benchmark::DoNotOptimize(bo::spectral::product_by_convolution(f, h));
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->ArgsProduct({{16, 32}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DealiasedProduct)->RangeMultiplier(2)->Range(8, 256);
BENCHMARK(BM_ConvolutionProduct)->RangeMultiplier(2)->Range(8, 256);

BENCHMARK_MAIN();
