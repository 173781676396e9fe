#pragma once

// Central-difference checks of the analytic loss gradients on small random
// networks.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "emot/mopg.hpp"
#include "oracles.hpp"

namespace oracle {

struct GradCheckResult {
  double surrogate = 0.0;  // worst relative error over the sampled parameters
  double regression = 0.0;
  double critic = 0.0;
};

inline GradCheckResult check_loss_gradients(std::uint64_t seed, std::size_t n_params = 20) {
  using namespace emot;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> width(3, 8), sdim(2, 6);
  const std::size_t state_dim = sdim(rng);
  const std::vector<std::size_t> hidden{width(rng), width(rng)};
  std::uniform_real_distribution<double> gstd(0.2, 0.9), phi(0.5, 2.0);

  nn::GaussianPolicy behaviour = nn::GaussianPolicy::make(state_dim, 3, hidden, gstd(rng), phi(rng), rng());
  // The evaluated policy drifts away from the behaviour one so that some
  // ratios leave the clip interval.
  nn::GaussianPolicy pol = behaviour;
  std::normal_distribution<double> jitter(0.0, 0.15);
  for (double& p : pol.mean_net().params()) p += jitter(rng);
  for (double& p : pol.std_net().params()) p += jitter(rng);
  nn::VectorCritic critic = nn::VectorCritic::make(state_dim, 2, hidden, rng());

  const nn::TransitionBatch batch = random_batch(behaviour, 24, rng());
  std::vector<double> adv(batch.size());
  std::normal_distribution<double> z(0.0, 1.0);
  for (double& a : adv) a = z(rng);
  std::vector<std::size_t> idx(batch.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto targets = mopg::tdl_targets(batch, adv, 0.01);
  nn::Matrix returns(batch.size(), std::vector<double>(2));
  for (auto& row : returns)
    for (double& x : row) x = z(rng);

  const auto sg = mopg::clipped_surrogate(pol, batch, idx, adv, 0.2, 0.01);
  const auto rg = mopg::tdl_regression_loss(pol, batch, idx, targets);
  const auto cg = mopg::critic_mse(critic, batch, idx, returns);

  GradCheckResult res;
  const std::size_t n_mean = pol.mean_net().params().size();
  const std::size_t n_pol = n_mean + pol.std_net().params().size();
  std::uniform_int_distribution<std::size_t> pick_pol(0, n_pol - 1);
  std::uniform_int_distribution<std::size_t> pick_critic(0, critic.net().params().size() - 1);
  for (std::size_t k = 0; k < n_params; ++k) {
    const std::size_t i = pick_pol(rng);
    const bool in_mean = i < n_mean;
    auto& params = in_mean ? pol.mean_net().params() : pol.std_net().params();
    const std::size_t j = in_mean ? i : i - n_mean;
    const double fd_s = central_difference(
        params, j, [&] { return mopg::clipped_surrogate(pol, batch, idx, adv, 0.2, 0.01).value; });
    const double fd_r =
        central_difference(params, j, [&] { return mopg::tdl_regression_loss(pol, batch, idx, targets).value; });
    const double an_s = in_mean ? sg.grad.mean[j] : sg.grad.std[j];
    const double an_r = in_mean ? rg.grad.mean[j] : rg.grad.std[j];
    res.surrogate = std::max(res.surrogate, relative_error(an_s, fd_s));
    res.regression = std::max(res.regression, relative_error(an_r, fd_r));

    const std::size_t c = pick_critic(rng);
    const double fd_c =
        central_difference(critic.net().params(), c, [&] { return mopg::critic_mse(critic, batch, idx, returns).value; });
    res.critic = std::max(res.critic, relative_error(cg.grad[c], fd_c));
  }
  return res;
}

}  // namespace oracle
