#pragma once

// Multi-objective policy-gradient update rules. Both scalarize the vector
// advantage with the task's preference weight (xi^T A):
//   * mopg_ppo_update: clipped-surrogate ascent,
//   * tdl_update: regression of the policy onto per-step target
//     distributions whose mean step respects a KL budget, followed by the
//     damped global std refresh.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emot/advantage.hpp"
#include "emot/mlp.hpp"
#include "emot/policy.hpp"
#include "emot/weights.hpp"

namespace emot::mopg {

struct NetworkConfig {
  std::vector<std::size_t> hidden{64, 64};
  double init_global_std = 0.5;

  void validate() const;
};

struct PpoConfig {
  double clip_eps = 0.2;
  int epochs = 10;
  int minibatch = 64;
  int steps_per_iter = 2048;
  double entropy_coef = 0.0;
  double learning_rate = 1e-4;
  double critic_learning_rate = 1e-3;
  double gae_lambda = 0.95;
  bool normalize_advantage = true;

  void validate() const;
};

struct TdlConfig {
  double kl_budget = 0.01;
  double phi = 1.0;
  double improve_old_prob = 0.2;

  void validate() const;
};

struct TaskTuple {
  WeightVector weight;
  nn::GaussianPolicy policy;
  nn::VectorCritic critic;
  nn::Adam mean_opt;
  nn::Adam std_opt;
  nn::Adam critic_opt;
};

TaskTuple make_task(WeightVector weight, std::size_t state_dim, std::size_t action_dim, const NetworkConfig& net,
                    const PpoConfig& ppo, const TdlConfig& tdl, std::uint64_t seed);

/// Swaps in new learning rates while keeping moment estimates.
void set_learning_rates(TaskTuple& task, const PpoConfig& ppo);

struct UpdateDiagnostics {
  double surrogate_before = 0.0;  // weighted objective of the rule on the full batch
  double surrogate_after = 0.0;
  double mean_kl = 0.0;           // KL(old || new) averaged over the batch
  double policy_loss = 0.0;       // last minibatch
  double critic_loss = 0.0;       // last minibatch
  std::size_t minibatch_steps = 0;
  // TDL only: largest per-step KL from the old distribution to the target
  // mean at the old std, and to the full target (mean and std).
  double target_kl_mean_max = 0.0;
  double target_kl_full_max = 0.0;
  double indicator_fraction = 0.0;
};

struct LossAndGrad {
  double value = 0.0;
  nn::PolicyGrad grad;  // d value / d params
};

/// Mean clipped surrogate min(r A, clip(r, 1 +- eps) A) plus entropy bonus
/// over `indices`, with its gradient.
LossAndGrad clipped_surrogate(const nn::GaussianPolicy& policy, const nn::TransitionBatch& batch,
                              std::span<const std::size_t> indices, std::span<const double> advantages,
                              double clip_eps, double entropy_coef);

struct CriticLoss {
  double value = 0.0;
  nn::ParamVector grad;
};

/// Mean over `indices` of sum_k (V_k(s) - R_k)^2, with its gradient.
CriticLoss critic_mse(const nn::VectorCritic& critic, const nn::TransitionBatch& batch,
                      std::span<const std::size_t> indices, const nn::Matrix& returns);

struct TargetDistribution {
  std::vector<double> mean;
  std::vector<double> var;
};

/// Per-step target distributions. Mean step along y = (a - mu_old) / sigma_old
/// with length capped at sqrt(2 kl_budget); variance (a - mu_old)^2 for a
/// positive advantage, sigma_old^2 otherwise. Where `use_indicator[t]` is set
/// the sign of the advantage is replaced by the indicator A > 0, so a
/// non-positive advantage leaves the mean in place.
std::vector<TargetDistribution> tdl_targets(const nn::TransitionBatch& batch, std::span<const double> ext_advantages,
                                            double kl_budget, std::span<const std::uint8_t> use_indicator = {});

/// Convenience overload: GAE per objective with `critic`, scalarized by
/// `weight`, no indicator replacement.
std::vector<TargetDistribution> tdl_targets(const nn::TransitionBatch& batch, const WeightVector& weight,
                                            const nn::VectorCritic& critic, std::span<const double> gammas,
                                            double lambda, const TdlConfig& cfg);

/// Mean over `indices` of sum_d (mu_d - target_mu_d)^2 + (raw_std_d - target_std_d)^2.
LossAndGrad tdl_regression_loss(const nn::GaussianPolicy& policy, const nn::TransitionBatch& batch,
                                std::span<const std::size_t> indices, const std::vector<TargetDistribution>& targets);

/// Batch-mean of the target variances, one entry per action dimension.
std::vector<double> mean_target_variance(const std::vector<TargetDistribution>& targets);

/// Scales to zero mean and unit std when the spread is non-degenerate.
std::vector<double> normalized(std::span<const double> values);

/// One on-policy clipped-surrogate update. Throws std::runtime_error and
/// leaves `task` untouched when a loss turns non-finite.
UpdateDiagnostics mopg_ppo_update(TaskTuple& task, const nn::TransitionBatch& batch, std::span<const double> gammas,
                                  const PpoConfig& cfg, std::uint64_t seed);

/// One target-distribution-learning update. Throws std::runtime_error and
/// leaves `task` untouched when a loss turns non-finite.
UpdateDiagnostics tdl_update(TaskTuple& task, const nn::TransitionBatch& batch, std::span<const double> gammas,
                             const TdlConfig& cfg, const PpoConfig& ppo, std::uint64_t seed);

}  // namespace emot::mopg
