#pragma once

// Non-learning comparator trajectories. Every variant accepts uploads whenever
// a pending task lies in coverage of the post-move pose and runs the queue
// first-come-first-served (uploads enter nearest device first).

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "emot/momdp.hpp"
#include "emot/pareto.hpp"

namespace emot::baselines {

enum class BaselineKind {
  RandomWalk,  // uniform heading, full step, redrawn when it would exit
  Circular,    // circle about the area center, full step along the circle
  Spiral,      // Archimedean spiral out from the area center
  Hover,       // never moves
};

std::string to_string(BaselineKind kind);
/// Accepts random_walk, circular, spiral, hover; throws std::invalid_argument.
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineConfig {
  BaselineKind kind = BaselineKind::RandomWalk;
  double circle_radius_fraction = 1.0 / 3.0;       // of min(x_max, y_max)
  double spiral_max_radius_fraction = 0.45;        // of min(x_max, y_max)

  void validate() const;
};

/// Radial pitch b of r = b * phi such that a full-speed walk from the center
/// reaches the maximum radius at the horizon: b = r_max^2 / (2 d_max T).
double spiral_pitch(const BaselineConfig& cfg, const momdp::EnvConfig& env);

/// Circular: off the circle, head radially to it; on it, advance by a chord
/// of length d_max. Spiral: head to the center, then advance along the
/// spiral by arc length d_max, holding the outermost circle once reached.
momdp::ActionTuple baseline_action(const BaselineConfig& cfg, const momdp::EnvState& state,
                                   const momdp::Environment& env, std::mt19937_64& rng);

/// The environment configuration baselines run under (FCFS queue).
momdp::EnvConfig baseline_env(const momdp::EnvConfig& env);

momdp::RolloutResult baseline_rollout(const BaselineConfig& cfg, const momdp::EnvConfig& env, std::uint64_t seed);

/// Mean objectives over `seeds`.
pareto::ObjectivePoint evaluate_baseline(const BaselineConfig& cfg, const momdp::EnvConfig& env,
                                         std::span<const std::uint64_t> seeds);

}  // namespace emot::baselines
