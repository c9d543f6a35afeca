// Microbenchmarks for the hot paths: measurement refresh, incremental tilt
// updates, perception, network forward/backward, SA search, self-play episodes.
#include <benchmark/benchmark.h>

#include <cmath>

#include "cco/common.hpp"
#include "cco/graphdistill.hpp"
#include "cco/netsim.hpp"
#include "cco/neural.hpp"
#include "cco/optimize.hpp"
#include "cco/reward.hpp"
#include "cco/scenario.hpp"

namespace {

using namespace cco;

netsim::NetworkState bench_network(int cells, int ues) {
  scenario::RandomizationSpec spec;
  spec.cell_count = {cells, cells};
  spec.ue_count = {ues, ues};
  spec.area_side_m = std::sqrt(32.0e6 * cells);
  spec.tilt_init_range = {0, 12};
  return scenario::generate_network(spec, 42);
}

void BM_ComputeMeasurements(benchmark::State& state) {
  const auto st = bench_network(int(state.range(0)), 12 * int(state.range(0)));
  for (auto _ : state) {
    auto meas = netsim::compute_measurements(st);
    benchmark::DoNotOptimize(meas.sinr_db.data());
  }
  state.SetItemsProcessed(state.iterations() * st.ue_count() * st.cell_count());
}
BENCHMARK(BM_ComputeMeasurements)->Arg(12)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_SetTiltIncremental(benchmark::State& state) {
  const auto st = bench_network(30, 360);
  netsim::MeasurementEngine eng(st);
  Rng rng(1);
  for (auto _ : state) {
    const int cell = rng.uniform_int(0, st.cell_count() - 1);
    eng.set_tilt(cell, rng.uniform(0.0, 15.0));
    benchmark::DoNotOptimize(eng.coverage_pass_count(-105.0));
  }
  state.SetItemsProcessed(state.iterations() * st.ue_count());
}
BENCHMARK(BM_SetTiltIncremental)->Unit(benchmark::kMicrosecond);

void BM_Perceive(benchmark::State& state) {
  const auto st = bench_network(int(state.range(0)), 12 * int(state.range(0)));
  graphdistill::PerceptionConfig cfg;
  cfg.top_k = 8;
  cfg.k_fov = 8;
  for (auto _ : state) {
    auto p = graphdistill::perceive(st, cfg);
    benchmark::DoNotOptimize(p.tensors.data());
  }
}
BENCHMARK(BM_Perceive)->Arg(12)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_ForwardPass(benchmark::State& state) {
  neural::NetConfig cfg;
  cfg.k_fov = 8;
  cfg.m = 21;
  cfg.channels = int(state.range(0));
  cfg.blocks = 2;
  neural::PolicyNetwork<float> net(cfg, 7);
  std::vector<float> input(size_t(cfg.k_fov) * cfg.k_fov * cfg.m);
  Rng rng(8);
  for (auto& v : input) v = float(rng.uniform(-1.0, 1.0));
  for (auto _ : state) {
    auto pass = net.forward_pass(input);
    benchmark::DoNotOptimize(pass.dist.probs.data());
  }
}
BENCHMARK(BM_ForwardPass)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  neural::NetConfig cfg;
  cfg.k_fov = 8;
  cfg.m = 21;
  cfg.channels = int(state.range(0));
  cfg.blocks = 2;
  neural::PolicyNetwork<float> net(cfg, 7);
  neural::GradAccumulator<float> acc(net.param_count());
  std::vector<float> input(size_t(cfg.k_fov) * cfg.k_fov * cfg.m);
  Rng rng(8);
  for (auto& v : input) v = float(rng.uniform(-1.0, 1.0));
  for (auto _ : state) {
    auto pass = net.forward_pass(input);
    net.accumulate_from_pass(pass, 5, 1.0f, acc);
    benchmark::DoNotOptimize(acc.grad.data());
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_SaOptimize(benchmark::State& state) {
  const auto st = bench_network(10, 120);
  optimize::SAConfig sa;
  sa.n_shots = 1;
  sa.steps_per_shot = int(state.range(0));
  reward::RewardWeights w;
  uint64_t seed = 0;
  for (auto _ : state) {
    auto res = optimize::sa_optimize(st, sa, w, ++seed);
    benchmark::DoNotOptimize(res.best_reward);
  }
  state.SetItemsProcessed(state.iterations() * sa.steps_per_shot);
}
BENCHMARK(BM_SaOptimize)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_S2CEpisode(benchmark::State& state) {
  const auto st = bench_network(10, 120);
  graphdistill::PerceptionConfig pcfg;
  pcfg.top_k = 8;
  pcfg.k_fov = 8;
  neural::NetConfig ncfg;
  ncfg.k_fov = 8;
  ncfg.m = pcfg.registry.size();
  ncfg.channels = 16;
  ncfg.blocks = 2;
  neural::PolicyNetwork<float> net(ncfg, 7);
  neural::GradAccumulator<float> acc(net.param_count());
  reward::BestRecordStore store;
  optimize::SelfPlayConfig cfg;
  reward::RewardWeights w;
  Rng rng(9);
  double baseline = 0.0;
  std::int64_t episode = 0;
  for (auto _ : state) {
    auto log = optimize::s2c_episode(st, "bench", net, store, cfg, pcfg, w, episode++,
                                     baseline, acc, rng);
    benchmark::DoNotOptimize(log.r_new);
  }
}
BENCHMARK(BM_S2CEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
