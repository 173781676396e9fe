#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "emot/mopg.hpp"
#include "emot/seeds.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace emot;
using namespace emot::mopg;

namespace {

constexpr std::size_t kState = 5;

TaskTuple small_task(WeightVector w, std::uint64_t seed) {
  NetworkConfig net;
  net.hidden = {8, 8};
  PpoConfig ppo;
  ppo.learning_rate = 1e-3;
  return make_task(std::move(w), kState, 3, net, ppo, TdlConfig{}, seed);
}

PpoConfig small_ppo() {
  PpoConfig cfg;
  cfg.epochs = 3;
  cfg.minibatch = 16;
  cfg.learning_rate = 1e-3;
  return cfg;
}

nn::TransitionBatch single_step(std::vector<double> mu, std::vector<double> sd, std::vector<double> a) {
  nn::TransitionBatch b;
  b.states = {{0.0}};
  b.next_states = {{0.0}};
  b.actions = {std::move(a)};
  b.rewards = {{0.0, 0.0}};
  b.dones = {1};
  b.old_means = {std::move(mu)};
  b.old_stds = {std::move(sd)};
  b.old_logprobs = {0.0};
  return b;
}

const std::vector<double> kGammas{0.99, 0.99};

}  // namespace

TEST(Configs, Validation) {
  PpoConfig ppo;
  ppo.clip_eps = 0.0;
  EXPECT_THROW(ppo.validate(), std::invalid_argument);
  TdlConfig tdl;
  tdl.kl_budget = -1.0;
  EXPECT_THROW(tdl.validate(), std::invalid_argument);
  tdl = TdlConfig{};
  tdl.improve_old_prob = 1.5;
  EXPECT_THROW(tdl.validate(), std::invalid_argument);
  NetworkConfig net;
  net.hidden.clear();
  EXPECT_THROW(net.validate(), std::invalid_argument);
}

TEST(Normalized, CentersAndScales) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto n = normalized(v);
  double m = 0, s = 0;
  for (double x : n) m += x;
  for (double x : n) s += x * x;
  EXPECT_NEAR(m, 0.0, 1e-12);
  EXPECT_NEAR(s / 4.0, 1.0, 1e-12);
  const std::vector<double> flat{2.0, 2.0};
  EXPECT_EQ(normalized(flat), (std::vector<double>{0.0, 0.0}));
}

TEST(Gradients, MatchFiniteDifferences) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto r = oracle::check_loss_gradients(100 + s);
    EXPECT_LT(r.surrogate, 1e-4);
    EXPECT_LT(r.regression, 1e-4);
    EXPECT_LT(r.critic, 1e-4);
  }
}

TEST(Ppo, ZeroAdvantageIsFixedPoint) {
  TaskTuple task = small_task(WeightVector({0.5, 0.5}), 1);
  task.critic = nn::VectorCritic(nn::Mlp::zeros(task.critic.net().spec()));
  auto batch = oracle::random_batch(task.policy, 40, 2);
  for (auto& r : batch.rewards) r = {0.0, 0.0};
  const auto before = task.policy;
  const auto d = mopg_ppo_update(task, batch, kGammas, small_ppo(), 3);
  EXPECT_EQ(task.policy.mean_net().params(), before.mean_net().params());
  EXPECT_EQ(task.policy.std_net().params(), before.std_net().params());
  EXPECT_GT(d.minibatch_steps, 0u);
  EXPECT_EQ(d.surrogate_before, 0.0);
}

TEST(Ppo, VertexWeightIgnoresOtherObjective) {
  const TaskTuple base = small_task(WeightVector({1.0, 0.0}), 4);
  const auto batch = oracle::random_batch(base.policy, 48, 5);
  auto scrambled = batch;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 50.0);
  for (auto& r : scrambled.rewards) r[1] = z(rng);

  TaskTuple a = base, b = base;
  mopg_ppo_update(a, batch, kGammas, small_ppo(), 7);
  mopg_ppo_update(b, scrambled, kGammas, small_ppo(), 7);
  EXPECT_EQ(a.policy.mean_net().params(), b.policy.mean_net().params());
  EXPECT_EQ(a.policy.std_net().params(), b.policy.std_net().params());
  EXPECT_NE(a.critic.net().params(), b.critic.net().params());
}

TEST(Ppo, VertexAdvantageEqualsSingleObjectiveGae) {
  const TaskTuple task = small_task(WeightVector({1.0, 0.0}), 8);
  const auto batch = oracle::random_batch(task.policy, 30, 9);
  std::vector<double> r(batch.size()), v(batch.size()), vn(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    r[t] = batch.rewards[t][0];
    v[t] = task.critic.values(batch.states[t])[0];
    vn[t] = task.critic.values(batch.next_states[t])[0];
  }
  const auto expect = oracle::scalar_gae(r, v, vn, batch.dones, 0.99, 0.95);
  const auto est = nn::gae_per_objective(batch, task.critic, kGammas, 0.95);
  const auto xi = nn::extended_advantage(est.advantages, task.weight);
  for (std::size_t t = 0; t < xi.size(); ++t) EXPECT_NEAR(xi[t], expect[t], 1e-12);
}

TEST(Ppo, UpdateImprovesSurrogate) {
  TaskTuple task = small_task(WeightVector({0.3, 0.7}), 10);
  const auto batch = oracle::random_batch(task.policy, 64, 11);
  const auto d = mopg_ppo_update(task, batch, kGammas, small_ppo(), 12);
  EXPECT_GT(d.surrogate_after, d.surrogate_before);
  EXPECT_GT(d.mean_kl, 0.0);
  EXPECT_EQ(d.minibatch_steps, 3u * 4u);
}

TEST(Ppo, DeterministicForSeed) {
  const TaskTuple base = small_task(WeightVector({0.5, 0.5}), 13);
  const auto batch = oracle::random_batch(base.policy, 40, 14);
  TaskTuple a = base, b = base;
  mopg_ppo_update(a, batch, kGammas, small_ppo(), 15);
  mopg_ppo_update(b, batch, kGammas, small_ppo(), 15);
  EXPECT_EQ(a.policy.mean_net().params(), b.policy.mean_net().params());
  EXPECT_EQ(a.critic.net().params(), b.critic.net().params());
}

TEST(Ppo, NonFiniteLossAbortsAndKeepsTask) {
  TaskTuple task = small_task(WeightVector({0.5, 0.5}), 16);
  auto batch = oracle::random_batch(task.policy, 20, 17);
  batch.rewards[3][0] = std::numeric_limits<double>::quiet_NaN();
  const auto before = task.policy.mean_net().params();
  EXPECT_THROW(mopg_ppo_update(task, batch, kGammas, small_ppo(), 18), std::runtime_error);
  EXPECT_EQ(task.policy.mean_net().params(), before);
  EXPECT_THROW(tdl_update(task, batch, kGammas, TdlConfig{}, small_ppo(), 18), std::runtime_error);
  EXPECT_EQ(task.policy.mean_net().params(), before);
}

TEST(TdlTargets, SmallStepReachesTheAction) {
  // |y| = 0.1 is inside the cap sqrt(2 * 0.01).
  const auto b = single_step({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {0.1, 0.0, 0.0});
  const std::vector<double> pos{1.0};
  const auto t = tdl_targets(b, pos, 0.01);
  EXPECT_NEAR(t[0].mean[0], 0.1, 1e-15);
  EXPECT_NEAR(t[0].var[0], 0.01, 1e-15);
  EXPECT_EQ(t[0].var[1], 0.0);
}

TEST(TdlTargets, LargeStepIsCapped) {
  const auto b = single_step({1.0, 0.0, 0.0}, {2.0, 1.0, 1.0}, {3.0, 0.0, 0.0});
  const double cap = std::sqrt(0.02);
  const std::vector<double> pos{2.0}, neg{-2.0};
  auto t = tdl_targets(b, pos, 0.01);
  EXPECT_NEAR(t[0].mean[0], 1.0 + cap * 2.0, 1e-14);
  EXPECT_NEAR(t[0].var[0], 4.0, 1e-14);
  t = tdl_targets(b, neg, 0.01);
  EXPECT_NEAR(t[0].mean[0], 1.0 - cap * 2.0, 1e-14);
  EXPECT_NEAR(t[0].var[0], 4.0, 1e-14);  // old variance
  const std::vector<std::uint8_t> ind{1};
  t = tdl_targets(b, neg, 0.01, ind);
  EXPECT_EQ(t[0].mean[0], 1.0);
  t = tdl_targets(b, pos, 0.01, ind);
  EXPECT_NEAR(t[0].mean[0], 1.0 + cap * 2.0, 1e-14);
}

TEST(TdlTargets, ActionAtMeanKeepsMean) {
  const auto b = single_step({0.5, -0.5, 0.0}, {0.3, 0.3, 0.3}, {0.5, -0.5, 0.0});
  const std::vector<double> pos{1.0};
  const auto t = tdl_targets(b, pos, 0.01);
  EXPECT_EQ(t[0].mean, (std::vector<double>{0.5, -0.5, 0.0}));
  EXPECT_EQ(t[0].var, (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(TdlTargets, MeanStepRespectsKlBudget) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto pol = nn::GaussianPolicy::make(kState, 3, {6}, 0.5, 1.0, 20 + s);
    const auto batch = oracle::random_batch(pol, 200, 40 + s);
    std::mt19937_64 rng(s);
    std::normal_distribution<double> z(0.0, 3.0);
    std::vector<double> adv(batch.size());
    for (double& a : adv) a = z(rng);
    for (double budget : {0.001, 0.01, 0.1}) {
      const auto t = tdl_targets(batch, adv, budget);
      for (std::size_t i = 0; i < t.size(); ++i) {
        double kl = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          kl += oracle::gauss_kl_1d(batch.old_means[i][k], batch.old_stds[i][k], t[i].mean[k], batch.old_stds[i][k]);
        }
        EXPECT_LE(kl, budget + 1e-6);
      }
    }
  }
}

TEST(Tdl, GlobalStdIsMeanTargetVariance) {
  TaskTuple task = small_task(WeightVector({0.4, 0.6}), 50);
  const auto batch = oracle::random_batch(task.policy, 64, 51);
  const auto est = nn::gae_per_objective(batch, task.critic, kGammas, 0.95);
  const auto xi = normalized(nn::extended_advantage(est.advantages, task.weight));
  const auto var = mean_target_variance(tdl_targets(batch, xi, 0.01));
  const auto d = tdl_update(task, batch, kGammas, TdlConfig{}, small_ppo(), 52);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(task.policy.global_std()[k], std::sqrt(var[k]), 1e-12);
  EXPECT_LE(d.target_kl_mean_max, 0.01 + 1e-6);
  EXPECT_GT(d.indicator_fraction, 0.0);
  EXPECT_LT(d.indicator_fraction, 1.0);
}

TEST(Tdl, RegressionConvergesToTargets) {
  TaskTuple task = small_task(WeightVector({0.5, 0.5}), 60);
  const auto batch = oracle::random_batch(task.policy, 32, 61);
  std::vector<double> adv(batch.size(), 1.0);
  const auto targets = tdl_targets(batch, adv, 0.05);
  std::vector<std::size_t> idx(batch.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  nn::Adam om(task.policy.mean_net().params().size(), 1e-2), os(task.policy.std_net().params().size(), 1e-2);
  const double first = tdl_regression_loss(task.policy, batch, idx, targets).value;
  double last = first;
  for (int it = 0; it < 1500; ++it) {
    const auto lg = tdl_regression_loss(task.policy, batch, idx, targets);
    om.step(task.policy.mean_net().params(), lg.grad.mean);
    os.step(task.policy.std_net().params(), lg.grad.std);
    last = lg.value;
  }
  EXPECT_LT(last, 0.1 * first);
}

TEST(Tdl, DeterministicForSeed) {
  const TaskTuple base = small_task(WeightVector({0.5, 0.5}), 70);
  const auto batch = oracle::random_batch(base.policy, 40, 71);
  TaskTuple a = base, b = base;
  const auto da = tdl_update(a, batch, kGammas, TdlConfig{}, small_ppo(), 72);
  const auto db = tdl_update(b, batch, kGammas, TdlConfig{}, small_ppo(), 72);
  EXPECT_EQ(a.policy.mean_net().params(), b.policy.mean_net().params());
  EXPECT_EQ(a.policy.global_std(), b.policy.global_std());
  EXPECT_EQ(da.indicator_fraction, db.indicator_fraction);
}

TEST(Tasks, LearningRatesSwapInPlace) {
  TaskTuple task = small_task(WeightVector({0.5, 0.5}), 80);
  PpoConfig ppo;
  ppo.learning_rate = 3e-3;
  ppo.critic_learning_rate = 7e-3;
  set_learning_rates(task, ppo);
  EXPECT_EQ(task.mean_opt.learning_rate(), 3e-3);
  EXPECT_EQ(task.std_opt.learning_rate(), 3e-3);
  EXPECT_EQ(task.critic_opt.learning_rate(), 7e-3);
}
