// Benchmarks of the shooting side: one profile defect evaluation, the full
// ground-state construction, and one mode-equation defect at the gauge
// eigenvalue.

#include <benchmark/benchmark.h>

#include "wavemap/mode_ode.hpp"
#include "wavemap/profile.hpp"

namespace {

using namespace wavemap;

void BM_profile_defect(benchmark::State& state) {
  for (auto _ : state) {
    auto d = profile_defect(2.0, 1.0);
    benchmark::DoNotOptimize(d);
  }
}

void BM_shoot_profile_ground(benchmark::State& state) {
  for (auto _ : state) {
    Profile p = shoot_profile(0);
    benchmark::DoNotOptimize(p.b);
  }
}

void BM_shoot_profile_first(benchmark::State& state) {
  for (auto _ : state) {
    Profile p = shoot_profile(1);
    benchmark::DoNotOptimize(p.b);
  }
}

void BM_mode_defect(benchmark::State& state) {
  const Profile p = shoot_profile(0);
  for (auto _ : state) {
    auto d = mode_defect(1.0, 2.0, p);
    benchmark::DoNotOptimize(d);
  }
}

void BM_find_eigenvalue_gauge(benchmark::State& state) {
  const Profile p = shoot_profile(0);
  for (auto _ : state) {
    Eigenpair ep = find_eigenvalue(0.9, 1.8, p);
    benchmark::DoNotOptimize(ep.lambda);
  }
}

BENCHMARK(BM_profile_defect);
BENCHMARK(BM_shoot_profile_ground)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shoot_profile_first)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mode_defect);
BENCHMARK(BM_find_eigenvalue_gauge)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
