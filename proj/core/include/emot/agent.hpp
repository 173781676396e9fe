#pragma once

// Glue between the Gaussian policy and the environment: action mapping,
// on-policy batch collection and deterministic evaluation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emot/advantage.hpp"
#include "emot/momdp.hpp"
#include "emot/pareto.hpp"
#include "emot/policy.hpp"

namespace emot::agent {

inline constexpr std::size_t kActionDim = 3;

/// The policy acts in a normalized space u; this maps
///   theta = pi + pi * u0,  dist = d_max / 2 * (1 + u1),  accept = (1 + u2) / 2
/// before the environment's clipping.
momdp::ActionTuple to_env_action(std::span<const double> u, const env::UavLimits& limits);

/// Undiscounted returns of one episode after scaling by the learning scales.
struct EpisodeSummary {
  pareto::ObjectivePoint objectives;  // SI units
  double weighted_return = 0.0;       // w . (-scaled objectives)
};

struct CollectedBatch {
  nn::TransitionBatch batch;
  std::vector<EpisodeSummary> episodes;
};

/// Samples `n_episodes` full episodes with seeds derive_seed(seed, "episode",
/// {e}); rewards are multiplied by the learning scales and the last step of
/// every episode is marked done.
CollectedBatch collect_batch(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                             std::span<const double> weight, int n_episodes, std::uint64_t seed);

/// Objectives of a mean-action rollout.
momdp::RolloutResult deterministic_rollout(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                                           std::uint64_t seed);

/// Mean objectives of mean-action rollouts over `seeds`.
pareto::ObjectivePoint evaluate_policy(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                                       std::span<const std::uint64_t> seeds);

/// Objectives after multiplication by the learning scales, in maximization
/// coordinates.
pareto::MaxPoint scaled_max(const pareto::ObjectivePoint& p, const momdp::RewardConfig& reward);

}  // namespace emot::agent
