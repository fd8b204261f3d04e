// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "mpconv/distance.hpp"
#include "mpconv/ensemble.hpp"
#include "mpconv/kernels.hpp"

using namespace mpconv;

namespace {

EnsembleConfig square(std::size_t n) {
  EnsembleConfig c;
  c.n = n;
  c.p = n;
  c.base_seed = 1;
  return c;
}

void gram(benchmark::State& state, Execution exec) {
  const auto x = sample_matrix(square(static_cast<std::size_t>(state.range(0))), 0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram(x.entries, 1.0, exec));
}

void spectra(benchmark::State& state, Execution exec) {
  const auto cfg = square(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sample_spectra(cfg, 16, 0, exec));
}

}  // namespace

BENCHMARK_CAPTURE(gram, serial, Execution::serial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gram, parallel, Execution::parallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(spectra, serial, Execution::serial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(spectra, parallel, Execution::parallel)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
