#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "emot/mlp.hpp"
#include "emot/momdp.hpp"
#include "emot/pareto.hpp"
#include "emot/scheduler.hpp"

using namespace emot;

namespace {

std::vector<sched::QueueEntry> queue_of(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> proc(0.05, 1.0), enq(0.0, 2.0);
  std::vector<sched::QueueEntry> q(n);
  for (auto& e : q) {
    e.task = {0, 1e6, 1000.0, 0.0};
    e.enqueue_time = enq(rng);
    e.processing_time = proc(rng);
  }
  return q;
}

void BM_SaSchedule(benchmark::State& state) {
  const auto q = queue_of(static_cast<std::size_t>(state.range(0)));
  sched::SaConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sched::sa_schedule(q, cfg));
}
BENCHMARK(BM_SaSchedule)->Arg(4)->Arg(8)->Arg(16);

void BM_ScheduleCost(benchmark::State& state) {
  const auto q = queue_of(static_cast<std::size_t>(state.range(0)));
  const auto order = sched::fcfs_schedule(q);
  for (auto _ : state) benchmark::DoNotOptimize(sched::schedule_cost(q, order));
}
BENCHMARK(BM_ScheduleCost)->Arg(8)->Arg(64);

nn::Mlp bench_net() { return nn::Mlp::glorot({{24, 64, 64, 6}}, 1); }

void BM_MlpForward(benchmark::State& state) {
  const auto net = bench_net();
  const std::vector<double> x(24, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto net = bench_net();
  const std::vector<double> x(24, 0.3), g(6, 1.0);
  std::vector<double> grad(net.params().size());
  nn::Tape tape;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x, tape));
    net.backward(tape, g, grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MlpForwardBackward);

void BM_EnvironmentEpisode(benchmark::State& state) {
  momdp::EnvConfig cfg;
  cfg.n_gds = 10;
  cfg.horizon = 100;
  momdp::Environment env(cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    env.reset(seed++);
    double theta = 0.0;
    while (!env.done()) {
      benchmark::DoNotOptimize(env.step({theta, 5.0, 1.0}));
      theta = std::fmod(theta + 0.3, 6.0);
    }
  }
  state.SetItemsProcessed(state.iterations() * cfg.horizon);
}
BENCHMARK(BM_EnvironmentEpisode);

void BM_Hypervolume(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<pareto::MaxPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({t, 1.0 - t * t});
  }
  for (auto _ : state) benchmark::DoNotOptimize(pareto::hypervolume(pts, {-0.1, -0.1}));
}
BENCHMARK(BM_Hypervolume)->Arg(16)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
