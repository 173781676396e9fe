#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "emot/scheduler.hpp"
#include "oracles.hpp"

using namespace emot::sched;

namespace {

std::vector<QueueEntry> random_queue(std::size_t n, std::uint64_t seed, bool same_enqueue) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> proc(0.05, 1.0), enq(0.0, 2.0);
  std::vector<QueueEntry> q(n);
  for (auto& e : q) {
    e.task = {0, 1e6, 1000.0, 0.0};
    e.enqueue_time = same_enqueue ? 0.0 : enq(rng);
    e.processing_time = proc(rng);
  }
  return q;
}

}  // namespace

TEST(ScheduleCost, MatchesHandComputation) {
  std::vector<QueueEntry> q(3);
  q[0].enqueue_time = 0.0;
  q[0].processing_time = 2.0;
  q[1].enqueue_time = 0.5;
  q[1].processing_time = 1.0;
  q[2].enqueue_time = 5.0;
  q[2].processing_time = 1.0;
  // 0 runs [0,2], 1 waits 1.5 and runs [2,3], 2 starts at 5 with no wait.
  EXPECT_DOUBLE_EQ(schedule_cost(q, {0, 1, 2}), 1.5);
  // 1 runs [0.5,1.5], 0 waits 1.5.
  EXPECT_DOUBLE_EQ(schedule_cost(q, {1, 0, 2}), 1.5);
  EXPECT_DOUBLE_EQ(schedule_cost(q, {0, 1, 2}, 1.0), 1.0 + 2.5);
  EXPECT_THROW(schedule_cost(q, {0, 0, 2}), std::invalid_argument);
}

TEST(ScheduleCost, AgreesWithOracleOnRandomOrders) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto q = random_queue(6, s, false);
    std::vector<std::size_t> order{5, 3, 1, 0, 2, 4};
    EXPECT_NEAR(schedule_cost(q, order, 0.3), oracle::queue_wait(q, order, 0.3), 1e-12);
  }
}

TEST(Schedulers, ReturnPermutations) {
  const auto q = random_queue(7, 3, false);
  SaConfig cfg;
  for (auto kind : {SchedulerKind::SA, SchedulerKind::FCFS, SchedulerKind::SJF, SchedulerKind::PS}) {
    EXPECT_TRUE(is_permutation_of(make_schedule(kind, q, cfg), q.size())) << to_string(kind);
  }
  EXPECT_THROW(make_schedule(SchedulerKind::SA, std::vector<QueueEntry>{}, cfg), std::invalid_argument);
}

TEST(Schedulers, FcfsFollowsEnqueueOrderStably) {
  std::vector<QueueEntry> q(4);
  const double enq[] = {2.0, 1.0, 1.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    q[i].enqueue_time = enq[i];
    q[i].processing_time = 1.0;
  }
  EXPECT_EQ(fcfs_schedule(q), (Schedule{3, 1, 2, 0}));
}

TEST(Schedulers, SaIsDeterministicForSeed) {
  const auto q = random_queue(8, 11, false);
  SaConfig cfg;
  cfg.rng_seed = 99;
  EXPECT_EQ(sa_schedule(q, cfg), sa_schedule(q, cfg));
}

TEST(Schedulers, SaNeverWorseThanFcfs) {
  SaConfig cfg;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto q = random_queue(8, 1000 + s, false);
    cfg.rng_seed = s;
    EXPECT_LE(schedule_cost(q, sa_schedule(q, cfg)), schedule_cost(q, fcfs_schedule(q)) + 1e-12);
  }
}

TEST(Schedulers, SaMatchesBruteForceOnEightTasks) {
  SaConfig cfg;
  int optimal = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto q = random_queue(8, s, false);
    cfg.rng_seed = s;
    if (schedule_cost(q, sa_schedule(q, cfg)) <= oracle::brute_force_optimum(q) + 1e-9) ++optimal;
  }
  EXPECT_GE(optimal, 95);
}

TEST(Schedulers, SjfOptimalForEqualEnqueueTimes) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto q = random_queue(8, 500 + s, true);
    EXPECT_NEAR(schedule_cost(q, sjf_schedule(q)), oracle::brute_force_optimum(q), 1e-9);
  }
}

TEST(Schedulers, KindNamesRoundTrip) {
  for (auto kind : {SchedulerKind::SA, SchedulerKind::FCFS, SchedulerKind::SJF, SchedulerKind::PS}) {
    EXPECT_EQ(parse_scheduler_kind(to_string(kind)), kind);
  }
  EXPECT_EQ(parse_scheduler_kind("FCFS"), SchedulerKind::FCFS);
  EXPECT_THROW(parse_scheduler_kind("lifo"), std::invalid_argument);
}

TEST(Schedulers, SaConfigValidation) {
  SaConfig cfg;
  cfg.cooling = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SaConfig{};
  cfg.t_min = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
