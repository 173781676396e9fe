#include <algorithm>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "emot/agent.hpp"
#include "emot/evo.hpp"

using namespace emot;
using namespace emot::evo;
using emot::pareto::MaxPoint;

namespace {

RunConfig tiny_run(int generations) {
  RunConfig cfg;
  cfg.env.n_gds = 3;
  cfg.env.horizon = 12;
  cfg.net.hidden = {6};
  cfg.ppo.epochs = 2;
  cfg.ppo.minibatch = 12;
  cfg.ppo.steps_per_iter = 24;
  cfg.ppo.learning_rate = 1e-3;
  cfg.evo.n_tasks = 3;
  cfg.evo.warmup_iters = 2;
  cfg.evo.generations = generations;
  cfg.evo.eval_episodes = 2;
  cfg.evo.kmeans_k = 2;
  return cfg;
}

}  // namespace

TEST(Weights, EvenlySpacedOnSimplex) {
  const auto w = init_weights(5);
  ASSERT_EQ(w.size(), 5u);
  EXPECT_EQ(w[0][0], 0.0);
  EXPECT_EQ(w[0][1], 1.0);
  EXPECT_EQ(w[2][0], 0.5);
  EXPECT_EQ(w[4][0], 1.0);
  EXPECT_THROW(init_weights(1), std::invalid_argument);
}

TEST(TaskUpdate, MatchesExhaustiveScan) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10.0, 0.0);
  const auto w = init_weights(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MaxPoint> pop(9);
    for (auto& p : pop) p = {u(rng), u(rng)};
    const auto pick = task_update(w, pop);
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < pop.size(); ++j) {
        if (w[i][0] * pop[j].x + w[i][1] * pop[j].y > w[i][0] * pop[best].x + w[i][1] * pop[best].y) best = j;
      }
      EXPECT_EQ(pick[i], best);
    }
  }
  EXPECT_THROW(task_update(w, std::vector<MaxPoint>{}), std::invalid_argument);
}

TEST(TaskUpdate, TiesGoToLowestIndex) {
  const auto w = init_weights(2);
  const std::vector<MaxPoint> pop{{1, 1}, {1, 1}};
  EXPECT_EQ(task_update(w, pop), (std::vector<std::size_t>{0, 0}));
}

TEST(BufferPrune, KeepsFarthestPerWeight) {
  const auto w = init_weights(2);  // (0,1) and (1,0)
  const MaxPoint z{0, 0};
  // Three members point along +y, one along +x.
  const std::vector<MaxPoint> pop{{0.1, 1.0}, {0.1, 3.0}, {0.1, 2.0}, {5.0, 0.1}};
  EXPECT_EQ(buffer_prune(pop, w, z, 2), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(buffer_prune(pop, w, z, 1), (std::vector<std::size_t>{1, 3}));
  const std::vector<MaxPoint> at_ref{{0, 0}, {0, 1}};
  EXPECT_EQ(buffer_prune(at_ref, w, z, 1), (std::vector<std::size_t>{1}));
}

TEST(BufferPrune, IsIdempotent) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto w = init_weights(4);
  std::vector<MaxPoint> pop(30);
  for (auto& p : pop) p = {u(rng), u(rng)};
  const MaxPoint z{-0.1, -0.1};
  const auto keep = buffer_prune(pop, w, z, 2);
  EXPECT_LE(keep.size(), 8u);
  std::vector<MaxPoint> kept;
  for (auto i : keep) kept.push_back(pop[i]);
  const auto again = buffer_prune(kept, w, z, 2);
  EXPECT_EQ(again.size(), kept.size());
}

TEST(UpdateRule, Names) {
  EXPECT_EQ(parse_update_rule("TDL"), UpdateRule::TDL);
  EXPECT_EQ(parse_update_rule(to_string(UpdateRule::PPO)), UpdateRule::PPO);
  EXPECT_THROW(parse_update_rule("sac"), std::invalid_argument);
}

TEST(AgentMapping, NormalizedActionSpace) {
  env::UavLimits lim;
  const std::vector<double> zero{0.0, 0.0, 0.0};
  auto a = agent::to_env_action(zero, lim);
  EXPECT_NEAR(a.theta, std::numbers::pi, 1e-15);
  EXPECT_NEAR(a.dist, lim.d_max() / 2.0, 1e-15);
  EXPECT_NEAR(a.accept, 0.5, 1e-15);
  const std::vector<double> far{3.0, -4.0, 9.0};
  a = agent::to_env_action(far, lim);
  EXPECT_NEAR(a.theta, 2.0 * std::numbers::pi, 1e-12);
  EXPECT_EQ(a.dist, 0.0);
  EXPECT_EQ(a.accept, 1.0);
}

TEST(TrainTask, LogsOneRecordPerIteration) {
  const RunConfig cfg = tiny_run(0);
  const std::size_t sd = momdp::Environment(cfg.env).observation_dim();
  auto task = mopg::make_task(WeightVector({0.5, 0.5}), sd, agent::kActionDim, cfg.net, cfg.ppo, cfg.tdl, 3);
  const auto log = train_task(task, cfg, 3, 4, 0, 1);
  ASSERT_EQ(log.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(log[i].iteration, i);
    EXPECT_EQ(log[i].task, 1);
    EXPECT_GT(log[i].mean_f1, 0.0);
    EXPECT_GT(log[i].diag.minibatch_steps, 0u);
  }
}

TEST(Run, ZeroGenerationsIsWarmupOnly) {
  const auto res = run(tiny_run(0), 5);
  ASSERT_EQ(res.generations.size(), 1u);
  EXPECT_EQ(res.generations[0].generation, 0);
  EXPECT_EQ(res.generations[0].tasks.size(), 3u);
  EXPECT_FALSE(res.archive.empty());
  EXPECT_EQ(res.iterations.size(), 3u * 2u);
  for (const auto& p : res.archive.points()) EXPECT_TRUE(pareto::dominates(p, res.hv_reference));
  EXPECT_GT(res.generations[0].hypervolume, 0.0);
}

TEST(Run, ArchiveInvariantsAcrossGenerations) {
  const auto res = run(tiny_run(3), 6);
  ASSERT_EQ(res.generations.size(), 4u);
  double prev = 0.0;
  for (const auto& g : res.generations) {
    std::vector<MaxPoint> pts;
    for (const auto& p : g.archive_points) pts.push_back(pareto::to_max(p));
    EXPECT_TRUE(pareto::mutually_nondominated(pts));
    EXPECT_GE(g.hypervolume, prev);
    prev = g.hypervolume;
    EXPECT_LE(g.population_size, 3u * 2u);
  }
  std::size_t clustered = 0;
  for (const auto& c : res.front.clusters) clustered += c.members.size();
  EXPECT_EQ(clustered, res.archive.size());
}

TEST(Run, DeterministicAcrossWorkerCounts) {
  auto cfg = tiny_run(2);
  const auto a = run(cfg, 7);
  cfg.evo.workers = 3;
  const auto b = run(cfg, 7);
  ASSERT_EQ(a.archive.size(), b.archive.size());
  for (std::size_t i = 0; i < a.archive.size(); ++i) {
    EXPECT_EQ(a.archive.entries()[i].point, b.archive.entries()[i].point);
    EXPECT_EQ(a.archive.entries()[i].payload.policy.mean_net().params(),
              b.archive.entries()[i].payload.policy.mean_net().params());
  }
  EXPECT_EQ(a.hv_reference, b.hv_reference);
}

TEST(Run, PpoRuleAlsoRuns) {
  auto cfg = tiny_run(1);
  cfg.rule = UpdateRule::PPO;
  const auto res = run(cfg, 8);
  EXPECT_EQ(res.generations.size(), 2u);
  EXPECT_FALSE(res.archive.empty());
}

TEST(ArchiveHypervolume, IgnoresPointsOutsideReference) {
  const std::vector<MaxPoint> pts{{2, 2}, {-5, 3}};
  EXPECT_DOUBLE_EQ(archive_hypervolume(pts, {0, 0}), 4.0);
}
