#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "emot/baselines.hpp"

using namespace emot;
using namespace emot::baselines;

namespace {

momdp::EnvConfig env_config() {
  momdp::EnvConfig cfg;
  cfg.n_gds = 6;
  cfg.horizon = 80;
  return cfg;
}

BaselineConfig kind(BaselineKind k) {
  BaselineConfig c;
  c.kind = k;
  return c;
}

double radius(const env::Position3& p, const env::UavLimits& lim) {
  return std::hypot(p.x - 0.5 * lim.x_max, p.y - 0.5 * lim.y_max);
}

}  // namespace

TEST(Baselines, NamesRoundTrip) {
  for (auto k : {BaselineKind::RandomWalk, BaselineKind::Circular, BaselineKind::Spiral, BaselineKind::Hover}) {
    EXPECT_EQ(parse_baseline_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_baseline_kind("zigzag"), std::invalid_argument);
}

TEST(Baselines, RunFirstComeFirstServed) {
  auto cfg = env_config();
  cfg.scheduler_kind = sched::SchedulerKind::SA;
  EXPECT_EQ(baseline_env(cfg).scheduler_kind, sched::SchedulerKind::FCFS);
}

TEST(Baselines, NeverLeaveTheArea) {
  const auto cfg = env_config();
  for (auto k : {BaselineKind::RandomWalk, BaselineKind::Circular, BaselineKind::Spiral, BaselineKind::Hover}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = baseline_rollout(kind(k), cfg, seed);
      for (const auto& s : r.ledger.slots) EXPECT_FALSE(s.penalized) << to_string(k);
    }
  }
}

TEST(Baselines, CircularAdvancesByChordOnTheCircle) {
  const auto cfg = env_config();
  const auto bc = kind(BaselineKind::Circular);
  const double r = bc.circle_radius_fraction * 1000.0;
  const auto res = baseline_rollout(bc, cfg, 3);
  bool on = false;
  env::Position3 prev = res.ledger.initial_pose;
  int chords = 0;
  for (const auto& s : res.ledger.slots) {
    if (on) {
      EXPECT_NEAR(radius(s.pose, cfg.limits), r, 1e-6);
      EXPECT_NEAR(std::hypot(s.pose.x - prev.x, s.pose.y - prev.y), cfg.limits.d_max(), 1e-6);
      ++chords;
    }
    on = on || std::abs(radius(s.pose, cfg.limits) - r) < 1e-6;
    prev = s.pose;
  }
  EXPECT_GT(chords, 10);
}

TEST(Baselines, SpiralRadiusNeverShrinksOnceStarted) {
  auto cfg = env_config();
  cfg.horizon = 200;
  const auto bc = kind(BaselineKind::Spiral);
  const double r_max = bc.spiral_max_radius_fraction * 1000.0;
  const auto res = baseline_rollout(bc, cfg, 4);
  bool started = false;
  double prev_r = 0.0;
  for (const auto& s : res.ledger.slots) {
    const double rho = radius(s.pose, cfg.limits);
    if (started) {
      EXPECT_GE(rho, prev_r - 1e-6);
      EXPECT_LE(rho, r_max + 1e-6);
    }
    started = started || rho < 1e-6;
    prev_r = rho;
  }
  EXPECT_TRUE(started);
  EXPECT_GT(prev_r, 0.5 * r_max);
}

TEST(Baselines, SpiralPitch) {
  const auto cfg = env_config();
  const double r_max = 450.0;
  EXPECT_NEAR(spiral_pitch(kind(BaselineKind::Spiral), cfg), r_max * r_max / (2.0 * 30.0 * 80), 1e-12);
}

TEST(Baselines, NothingInRangeMeansNoUploads) {
  auto cfg = env_config();
  cfg.limits.theta_max = 1e-6;  // coverage radius of 0.1 mm
  for (auto k : {BaselineKind::RandomWalk, BaselineKind::Circular, BaselineKind::Spiral, BaselineKind::Hover}) {
    const auto r = baseline_rollout(kind(k), cfg, 5);
    EXPECT_EQ(r.ledger.tasks_uploaded, 0) << to_string(k);
  }
  momdp::Environment env(baseline_env(cfg));
  const auto s = env.reset(6);
  std::mt19937_64 rng(1);
  EXPECT_EQ(baseline_action(kind(BaselineKind::Hover), s, env, rng).accept, 0.0);
}

TEST(Baselines, HoverSpendsHoverPower) {
  const auto cfg = env_config();
  const auto r = baseline_rollout(kind(BaselineKind::Hover), cfg, 7);
  const double p0 = env::propulsion_power(0.0, cfg.propulsion);
  double slot = 0.0;
  for (const auto& s : r.ledger.slots) {
    EXPECT_NEAR(s.flight_energy, p0 * cfg.limits.slot_seconds, 1e-9);
    EXPECT_EQ(s.pose.x, r.ledger.initial_pose.x);
    slot += s.slot_energy();
  }
  EXPECT_NEAR(momdp::episode_objectives(r.ledger).f2, cfg.horizon * p0 + slot, 1e-6);
}

TEST(Baselines, RandomWalkFliesAtFullSpeed) {
  const auto cfg = env_config();
  const auto r = baseline_rollout(kind(BaselineKind::RandomWalk), cfg, 8);
  const double full = env::flight_energy_step(cfg.limits.v_max, cfg.propulsion, cfg.limits.slot_seconds);
  for (const auto& s : r.ledger.slots) EXPECT_NEAR(s.flight_energy, full, 1e-9);
}

TEST(Baselines, EvaluateAveragesSeeds) {
  const auto cfg = env_config();
  const auto bc = kind(BaselineKind::Circular);
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto a = momdp::episode_objectives(baseline_rollout(bc, cfg, 1).ledger);
  const auto b = momdp::episode_objectives(baseline_rollout(bc, cfg, 2).ledger);
  const auto m = evaluate_baseline(bc, cfg, seeds);
  EXPECT_NEAR(m.f1, 0.5 * (a.f1 + b.f1), 1e-9);
  EXPECT_NEAR(m.f2, 0.5 * (a.f2 + b.f2), 1e-9);
  EXPECT_THROW(evaluate_baseline(bc, cfg, std::vector<std::uint64_t>{}), std::invalid_argument);
}
