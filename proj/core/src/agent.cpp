#include "emot/agent.hpp"

#include <numbers>
#include <random>
#include <stdexcept>

#include "emot/seeds.hpp"

namespace emot::agent {

momdp::ActionTuple to_env_action(std::span<const double> u, const env::UavLimits& limits) {
  if (u.size() != kActionDim) throw std::invalid_argument("to_env_action: expected a 3-component action");
  const std::array<double, 3> raw{std::numbers::pi + std::numbers::pi * u[0], 0.5 * limits.d_max() * (1.0 + u[1]),
                                  0.5 * (1.0 + u[2])};
  return momdp::decode_action(raw, limits);
}

CollectedBatch collect_batch(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                             std::span<const double> weight, int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("collect_batch: need at least one episode");
  if (weight.size() != 2) throw std::invalid_argument("collect_batch: expected a 2-objective weight");
  const auto& scales = cfg.reward.learning_scales;
  CollectedBatch out;
  nn::TransitionBatch& b = out.batch;
  const std::size_t n = static_cast<std::size_t>(n_episodes) * static_cast<std::size_t>(cfg.horizon);
  b.states.reserve(n);
  b.next_states.reserve(n);
  momdp::Environment env(cfg);
  for (int e = 0; e < n_episodes; ++e) {
    const std::uint64_t ep_seed = derive_seed(seed, "episode", {static_cast<std::uint64_t>(e)});
    std::mt19937_64 rng(derive_seed(ep_seed, "actions"));
    momdp::EnvState s = env.reset(ep_seed);
    std::vector<double> obs = env.encode(s);
    while (!env.done()) {
      const nn::ActionSample a = nn::sample_and_logprob(policy, obs, rng);
      momdp::StepResult r = env.step(to_env_action(a.action, cfg.limits));
      std::vector<double> next_obs = env.encode(r.next);
      b.states.push_back(obs);
      b.actions.push_back(a.action);
      b.rewards.push_back({r.reward.r_delay * scales[0], r.reward.r_energy * scales[1]});
      b.dones.push_back(r.done ? 1 : 0);
      b.old_means.push_back(a.dist.mean);
      b.old_stds.push_back(a.dist.std);
      b.old_logprobs.push_back(a.logprob);
      b.next_states.push_back(next_obs);
      obs = std::move(next_obs);
    }
    const momdp::Objectives o = momdp::episode_objectives(env.ledger());
    EpisodeSummary summary;
    summary.objectives = {o.f1, o.f2};
    summary.weighted_return = -(weight[0] * scales[0] * o.f1 + weight[1] * scales[1] * o.f2);
    out.episodes.push_back(summary);
  }
  return out;
}

momdp::RolloutResult deterministic_rollout(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                                           std::uint64_t seed) {
  return momdp::rollout(
      [&](const momdp::EnvState& s, const momdp::Environment& env) {
        return to_env_action(policy.forward(env.encode(s)).mean, cfg.limits);
      },
      cfg, seed);
}

pareto::ObjectivePoint evaluate_policy(const nn::GaussianPolicy& policy, const momdp::EnvConfig& cfg,
                                       std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("evaluate_policy: no evaluation seeds");
  pareto::ObjectivePoint mean;
  for (const std::uint64_t s : seeds) {
    const momdp::Objectives o = momdp::episode_objectives(deterministic_rollout(policy, cfg, s).ledger);
    mean.f1 += o.f1;
    mean.f2 += o.f2;
  }
  mean.f1 /= static_cast<double>(seeds.size());
  mean.f2 /= static_cast<double>(seeds.size());
  return mean;
}

pareto::MaxPoint scaled_max(const pareto::ObjectivePoint& p, const momdp::RewardConfig& reward) {
  return {-reward.learning_scales[0] * p.f1, -reward.learning_scales[1] * p.f2};
}

}  // namespace emot::agent
