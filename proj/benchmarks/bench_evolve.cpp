// Hot-path benchmarks of the evolution scheme: the semi-discrete spatial
// operator and one full Heun step, at a mid and the production resolution.

#include <benchmark/benchmark.h>

#include "wavemap/evolve.hpp"
#include "wavemap/profile.hpp"
#include "wavemap/spectra.hpp"

namespace {

using namespace wavemap;

const Profile& ground() {
  static const Profile p =
      extend_beyond_lightcone(shoot_profile(0), 1.0 + 1.0 / 32.0);
  return p;
}

void BM_spatial_operator(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const SchemeConfig cfg(g, ground(), 0.25);
  const State s = seed_phi(g);
  State du(g);
  for (auto _ : state) {
    detail::spatial_operator_into(s, cfg, du);
    benchmark::DoNotOptimize(du.u2.data());
  }
  state.SetItemsProcessed(state.iterations() * g.points());
}

void BM_heun_step(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const SchemeConfig cfg(g, ground(), 0.25);
  State s = seed_phi(g);
  State k1(g), k2(g), stage(g);
  const double dt = cfg.dtau();
  for (auto _ : state) {
    detail::heun_step_inplace(s, cfg, dt, k1, k2, stage);
    benchmark::DoNotOptimize(s.u2.data());
  }
  state.SetItemsProcessed(state.iterations() * g.points());
}

void BM_filtered_step_4levels(benchmark::State& state) {
  const Grid g(static_cast<int>(state.range(0)));
  const SchemeConfig cfg(g, ground(), 0.25);
  CoEvolveOptions opt;
  opt.tau_end = 8.0 * cfg.dtau();  // a handful of steps per iteration
  opt.record_stride = 1 << 20;     // record endpoints only
  const auto seeds = default_seeds(g, 4);
  for (auto _ : state) {
    FilterBank bank = co_evolve_filtered(seeds, cfg, opt);
    benchmark::DoNotOptimize(bank.rescale_total.data());
  }
  state.SetItemsProcessed(state.iterations() * 8 * 4 * g.points());
}

BENCHMARK(BM_spatial_operator)->Arg(512)->Arg(2048);
BENCHMARK(BM_heun_step)->Arg(512)->Arg(2048);
BENCHMARK(BM_filtered_step_4levels)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
