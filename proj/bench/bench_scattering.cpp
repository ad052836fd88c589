// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

// Serial reference vs decimated OpenMP kernel on one second of noise.
// Arguments: T, Q1, threads (0 = OpenMP default).

#include "signals.hpp"
#include "wst/scattering.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

namespace {

using namespace wst;

struct Setup {
  AudioBuffer x;
  ScatteringConfig config;
  std::vector<WaveletFilterbank> banks;
};

Setup make_setup(const benchmark::State& state) {
  Setup s{AudioBuffer(signals::white_noise(8000, 7, 0.3)), {}, {}};
  s.config.T = static_cast<int>(state.range(0));
  s.config.Q1 = static_cast<int>(state.range(1));
  s.banks = make_banks(s.config, s.x.size());
  return s;
}

void BM_Reference(benchmark::State& state) {
  const Setup s = make_setup(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::scattering_coefficients(s.x, s.config, s.banks));
  }
}

void BM_Parallel(benchmark::State& state) {
  const Setup s = make_setup(state);
  const int saved = omp_get_max_threads();
  if (state.range(2) > 0) omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(scattering_coefficients(s.x, s.config, s.banks));
  }
  omp_set_num_threads(saved);
}

void Grid(benchmark::internal::Benchmark* b, bool threads) {
  for (int T : {256, 1024}) {
    for (int Q : {2, 8}) {
      if (threads) {
        b->Args({T, Q, 1});
        b->Args({T, Q, 0});
      } else {
        b->Args({T, Q, 1});
      }
    }
  }
  b->ArgNames({"T", "Q1", "threads"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_Reference)->Apply([](auto* b) { Grid(b, false); });
BENCHMARK(BM_Parallel)->Apply([](auto* b) { Grid(b, true); });

BENCHMARK_MAIN();
