#include "emot/mopg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "emot/seeds.hpp"

namespace emot::mopg {

using nn::Matrix;
using nn::TransitionBatch;

void NetworkConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("NetworkConfig: need at least one hidden layer");
  for (const std::size_t w : hidden) {
    if (w < 1) throw std::invalid_argument("NetworkConfig: hidden widths must be >= 1");
  }
  if (!(init_global_std > 0.0)) throw std::invalid_argument("NetworkConfig: init_global_std must be > 0");
}

void PpoConfig::validate() const {
  if (!(clip_eps > 0.0)) throw std::invalid_argument("PpoConfig: clip_eps must be > 0");
  if (epochs < 1 || minibatch < 1 || steps_per_iter < 1) {
    throw std::invalid_argument("PpoConfig: epochs, minibatch and steps_per_iter must be >= 1");
  }
  if (!(entropy_coef >= 0.0)) throw std::invalid_argument("PpoConfig: entropy_coef must be >= 0");
  if (!(learning_rate > 0.0) || !(critic_learning_rate > 0.0)) {
    throw std::invalid_argument("PpoConfig: learning rates must be > 0");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("PpoConfig: gae_lambda must be in [0,1]");
}

void TdlConfig::validate() const {
  if (!(kl_budget > 0.0)) throw std::invalid_argument("TdlConfig: kl_budget must be > 0");
  if (!(phi > 0.0)) throw std::invalid_argument("TdlConfig: phi must be > 0");
  if (!(improve_old_prob >= 0.0 && improve_old_prob <= 1.0)) {
    throw std::invalid_argument("TdlConfig: improve_old_prob must be in [0,1]");
  }
}

TaskTuple make_task(WeightVector weight, std::size_t state_dim, std::size_t action_dim, const NetworkConfig& net,
                    const PpoConfig& ppo, const TdlConfig& tdl, std::uint64_t seed) {
  net.validate();
  ppo.validate();
  tdl.validate();
  TaskTuple task;
  task.policy = nn::GaussianPolicy::make(state_dim, action_dim, net.hidden, net.init_global_std, tdl.phi,
                                         derive_seed(seed, "task-policy"));
  task.critic = nn::VectorCritic::make(state_dim, weight.size(), net.hidden, derive_seed(seed, "task-critic"));
  task.weight = std::move(weight);
  task.mean_opt = nn::Adam(task.policy.mean_net().params().size(), ppo.learning_rate);
  task.std_opt = nn::Adam(task.policy.std_net().params().size(), ppo.learning_rate);
  task.critic_opt = nn::Adam(task.critic.net().params().size(), ppo.critic_learning_rate);
  return task;
}

void set_learning_rates(TaskTuple& task, const PpoConfig& ppo) {
  task.mean_opt.set_learning_rate(ppo.learning_rate);
  task.std_opt.set_learning_rate(ppo.learning_rate);
  task.critic_opt.set_learning_rate(ppo.critic_learning_rate);
}

namespace {

void check_indices(const TransitionBatch& batch, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("loss: empty index set");
  for (const std::size_t i : indices) {
    if (i >= batch.size()) throw std::out_of_range("loss: index beyond batch");
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void abort_update(const char* rule, const char* what, int epoch, std::size_t step, double value) {
  std::ostringstream os;
  os << rule << ": non-finite " << what << " at epoch " << epoch << ", minibatch step " << step << " (value " << value
     << "); update aborted, parameters left unchanged";
  throw std::runtime_error(os.str());
}

void descend(nn::Adam& opt, nn::ParamVector& params, std::span<const double> grad) { opt.step(params, grad); }

void ascend(nn::Adam& opt, nn::ParamVector& params, std::span<const double> grad) {
  std::vector<double> neg(grad.begin(), grad.end());
  for (double& g : neg) g = -g;
  opt.step(params, neg);
}

double mean_kl_old_to_new(const nn::GaussianPolicy& policy, const TransitionBatch& batch) {
  double acc = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const nn::PolicyOutput out = policy.forward(batch.states[t]);
    acc += nn::gaussian_kl(batch.old_means[t], batch.old_stds[t], out.mean, out.std);
  }
  return batch.size() ? acc / static_cast<double>(batch.size()) : 0.0;
}

std::vector<double> scalar_advantages(const TaskTuple& task, const nn::AdvantageEstimate& est, bool normalize) {
  std::vector<double> xi = nn::extended_advantage(est.advantages, task.weight);
  return normalize ? normalized(xi) : xi;
}

}  // namespace

std::vector<double> normalized(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double var = 0.0;
  for (const double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
  for (double& v : out) v = (v - mean) * scale;
  return out;
}

LossAndGrad clipped_surrogate(const nn::GaussianPolicy& policy, const TransitionBatch& batch,
                              std::span<const std::size_t> indices, std::span<const double> advantages,
                              double clip_eps, double entropy_coef) {
  check_indices(batch, indices);
  if (advantages.size() != batch.size()) throw std::invalid_argument("clipped_surrogate: advantage length mismatch");
  const std::size_t d = policy.action_dim();
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  const double entropy_const = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  LossAndGrad res;
  res.grad = policy.zero_grad();
  nn::PolicyPass pass;
  std::vector<double> d_mean(d), d_std(d);
  for (const std::size_t i : indices) {
    const nn::PolicyOutput& out = policy.forward(batch.states[i], pass);
    const std::vector<double>& a = batch.actions[i];
    const double logp = nn::gaussian_logprob(a, out.mean, out.std);
    const double ratio = std::exp(logp - batch.old_logprobs[i]);
    const double adv = advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    const double term = std::min(ratio * adv, clipped * adv);
    double entropy = 0.0;
    for (std::size_t k = 0; k < d; ++k) entropy += entropy_const + std::log(out.std[k]);
    res.value += inv_n * (term + entropy_coef * entropy);

    const bool active = adv >= 0.0 ? ratio <= 1.0 + clip_eps : ratio >= 1.0 - clip_eps;
    const double d_logp = active ? inv_n * ratio * adv : 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double sd = out.std[k];
      const double u = a[k] - out.mean[k];
      d_mean[k] = d_logp * u / (sd * sd);
      d_std[k] = d_logp * (u * u / (sd * sd * sd) - 1.0 / sd) + inv_n * entropy_coef / sd;
    }
    policy.backward(pass, d_mean, d_std, {}, res.grad);
  }
  return res;
}

CriticLoss critic_mse(const nn::VectorCritic& critic, const TransitionBatch& batch,
                      std::span<const std::size_t> indices, const Matrix& returns) {
  check_indices(batch, indices);
  if (returns.size() != batch.size()) throw std::invalid_argument("critic_mse: return length mismatch");
  const std::size_t m = critic.n_objectives();
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  CriticLoss res;
  res.grad.assign(critic.net().params().size(), 0.0);
  nn::Tape tape;
  std::vector<double> d_out(m);
  for (const std::size_t i : indices) {
    const std::vector<double> v = critic.net().forward(batch.states[i], tape);
    if (returns[i].size() != m) throw std::invalid_argument("critic_mse: return width mismatch");
    for (std::size_t k = 0; k < m; ++k) {
      const double e = v[k] - returns[i][k];
      res.value += inv_n * e * e;
      d_out[k] = 2.0 * inv_n * e;
    }
    critic.net().backward(tape, d_out, res.grad);
  }
  return res;
}

std::vector<TargetDistribution> tdl_targets(const TransitionBatch& batch, std::span<const double> ext_advantages,
                                            double kl_budget, std::span<const std::uint8_t> use_indicator) {
  batch.validate();
  if (ext_advantages.size() != batch.size()) throw std::invalid_argument("tdl_targets: advantage length mismatch");
  if (!use_indicator.empty() && use_indicator.size() != batch.size()) {
    throw std::invalid_argument("tdl_targets: indicator mask length mismatch");
  }
  if (!(kl_budget > 0.0)) throw std::invalid_argument("tdl_targets: kl_budget must be > 0");
  const double cap = std::sqrt(2.0 * kl_budget);
  std::vector<TargetDistribution> targets(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const std::vector<double>& mu = batch.old_means[t];
    const std::vector<double>& sd = batch.old_stds[t];
    const std::vector<double>& a = batch.actions[t];
    const std::size_t d = mu.size();
    const double adv = ext_advantages[t];
    double sign = adv > 0.0 ? 1.0 : (adv < 0.0 ? -1.0 : 0.0);
    if (!use_indicator.empty() && use_indicator[t]) sign = adv > 0.0 ? 1.0 : 0.0;

    std::vector<double> y(d);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (!(sd[k] > 0.0)) throw std::invalid_argument("tdl_targets: old std must be > 0");
      y[k] = (a[k] - mu[k]) / sd[k];
      norm2 += y[k] * y[k];
    }
    const double norm = std::sqrt(norm2);
    const double step = norm > 0.0 ? std::min(1.0, cap / norm) : 1.0;
    TargetDistribution& tg = targets[t];
    tg.mean.resize(d);
    tg.var.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      tg.mean[k] = mu[k] + sign * step * y[k] * sd[k];
      const double diff = a[k] - mu[k];
      tg.var[k] = adv > 0.0 ? diff * diff : sd[k] * sd[k];
    }
  }
  return targets;
}

std::vector<TargetDistribution> tdl_targets(const TransitionBatch& batch, const WeightVector& weight,
                                            const nn::VectorCritic& critic, std::span<const double> gammas,
                                            double lambda, const TdlConfig& cfg) {
  cfg.validate();
  const nn::AdvantageEstimate est = nn::gae_per_objective(batch, critic, gammas, lambda);
  return tdl_targets(batch, nn::extended_advantage(est.advantages, weight), cfg.kl_budget);
}

LossAndGrad tdl_regression_loss(const nn::GaussianPolicy& policy, const TransitionBatch& batch,
                                std::span<const std::size_t> indices, const std::vector<TargetDistribution>& targets) {
  check_indices(batch, indices);
  if (targets.size() != batch.size()) throw std::invalid_argument("tdl_regression_loss: target length mismatch");
  const std::size_t d = policy.action_dim();
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  LossAndGrad res;
  res.grad = policy.zero_grad();
  nn::PolicyPass pass;
  std::vector<double> d_mean(d), d_raw(d);
  for (const std::size_t i : indices) {
    const nn::PolicyOutput& out = policy.forward(batch.states[i], pass);
    for (std::size_t k = 0; k < d; ++k) {
      const double em = out.mean[k] - targets[i].mean[k];
      const double es = out.raw_std[k] - std::sqrt(targets[i].var[k]);
      res.value += inv_n * (em * em + es * es);
      d_mean[k] = 2.0 * inv_n * em;
      d_raw[k] = 2.0 * inv_n * es;
    }
    policy.backward(pass, d_mean, {}, d_raw, res.grad);
  }
  return res;
}

std::vector<double> mean_target_variance(const std::vector<TargetDistribution>& targets) {
  if (targets.empty()) throw std::invalid_argument("mean_target_variance: no targets");
  std::vector<double> acc(targets.front().var.size(), 0.0);
  for (const TargetDistribution& tg : targets) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += tg.var[k];
  }
  for (double& v : acc) v /= static_cast<double>(targets.size());
  return acc;
}

UpdateDiagnostics mopg_ppo_update(TaskTuple& task, const TransitionBatch& batch, std::span<const double> gammas,
                                  const PpoConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  batch.validate();
  if (batch.size() == 0) throw std::invalid_argument("mopg_ppo_update: empty batch");
  TaskTuple next = task;
  const nn::AdvantageEstimate est = nn::gae_per_objective(batch, next.critic, gammas, cfg.gae_lambda);
  const std::vector<double> xi = scalar_advantages(next, est, cfg.normalize_advantage);
  const std::vector<std::size_t> everything = all_indices(batch.size());

  UpdateDiagnostics diag;
  diag.surrogate_before =
      clipped_surrogate(next.policy, batch, everything, xi, cfg.clip_eps, cfg.entropy_coef).value;

  std::mt19937_64 rng(derive_seed(seed, "ppo-shuffle"));
  std::vector<std::size_t> perm = everything;
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatch);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += mb) {
      const std::span<const std::size_t> idx(perm.data() + start, std::min(mb, perm.size() - start));
      const LossAndGrad sg = clipped_surrogate(next.policy, batch, idx, xi, cfg.clip_eps, cfg.entropy_coef);
      if (!std::isfinite(sg.value) || !all_finite(sg.grad.mean) || !all_finite(sg.grad.std)) {
        abort_update("mopg_ppo_update", "policy surrogate", epoch, diag.minibatch_steps, sg.value);
      }
      ascend(next.mean_opt, next.policy.mean_net().params(), sg.grad.mean);
      ascend(next.std_opt, next.policy.std_net().params(), sg.grad.std);
      const CriticLoss cl = critic_mse(next.critic, batch, idx, est.returns);
      if (!std::isfinite(cl.value) || !all_finite(cl.grad)) {
        abort_update("mopg_ppo_update", "critic loss", epoch, diag.minibatch_steps, cl.value);
      }
      descend(next.critic_opt, next.critic.net().params(), cl.grad);
      diag.policy_loss = -sg.value;
      diag.critic_loss = cl.value;
      ++diag.minibatch_steps;
    }
  }
  diag.surrogate_after = clipped_surrogate(next.policy, batch, everything, xi, cfg.clip_eps, cfg.entropy_coef).value;
  diag.mean_kl = mean_kl_old_to_new(next.policy, batch);
  if (!std::isfinite(diag.surrogate_after) || !std::isfinite(diag.mean_kl)) {
    abort_update("mopg_ppo_update", "post-update surrogate", cfg.epochs, diag.minibatch_steps, diag.surrogate_after);
  }
  task = std::move(next);
  return diag;
}

UpdateDiagnostics tdl_update(TaskTuple& task, const TransitionBatch& batch, std::span<const double> gammas,
                             const TdlConfig& cfg, const PpoConfig& ppo, std::uint64_t seed) {
  cfg.validate();
  ppo.validate();
  batch.validate();
  if (batch.size() == 0) throw std::invalid_argument("tdl_update: empty batch");
  TaskTuple next = task;
  const nn::AdvantageEstimate est = nn::gae_per_objective(batch, next.critic, gammas, ppo.gae_lambda);
  const std::vector<double> xi = scalar_advantages(next, est, ppo.normalize_advantage);

  std::mt19937_64 coin(derive_seed(seed, "tdl-indicator"));
  std::bernoulli_distribution pick(cfg.improve_old_prob);
  std::vector<std::uint8_t> indicator(batch.size());
  std::size_t n_indicator = 0;
  for (std::uint8_t& f : indicator) {
    f = pick(coin) ? 1 : 0;
    n_indicator += f;
  }
  const std::vector<TargetDistribution> targets = tdl_targets(batch, xi, cfg.kl_budget, indicator);

  UpdateDiagnostics diag;
  diag.indicator_fraction = static_cast<double>(n_indicator) / static_cast<double>(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    std::vector<double> target_std(targets[t].var.size());
    for (std::size_t k = 0; k < target_std.size(); ++k) target_std[k] = std::sqrt(targets[t].var[k]);
    diag.target_kl_mean_max = std::max(
        diag.target_kl_mean_max,
        nn::gaussian_kl(batch.old_means[t], batch.old_stds[t], targets[t].mean, batch.old_stds[t]));
    diag.target_kl_full_max =
        std::max(diag.target_kl_full_max, nn::gaussian_kl(batch.old_means[t], batch.old_stds[t], targets[t].mean,
                                                          target_std));
  }

  const std::vector<std::size_t> everything = all_indices(batch.size());
  diag.surrogate_before = -tdl_regression_loss(next.policy, batch, everything, targets).value;

  std::mt19937_64 rng(derive_seed(seed, "tdl-shuffle"));
  std::vector<std::size_t> perm = everything;
  const std::size_t mb = static_cast<std::size_t>(ppo.minibatch);
  for (int epoch = 0; epoch < ppo.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += mb) {
      const std::span<const std::size_t> idx(perm.data() + start, std::min(mb, perm.size() - start));
      const LossAndGrad rl = tdl_regression_loss(next.policy, batch, idx, targets);
      if (!std::isfinite(rl.value) || !all_finite(rl.grad.mean) || !all_finite(rl.grad.std)) {
        abort_update("tdl_update", "regression loss", epoch, diag.minibatch_steps, rl.value);
      }
      descend(next.mean_opt, next.policy.mean_net().params(), rl.grad.mean);
      descend(next.std_opt, next.policy.std_net().params(), rl.grad.std);
      const CriticLoss cl = critic_mse(next.critic, batch, idx, est.returns);
      if (!std::isfinite(cl.value) || !all_finite(cl.grad)) {
        abort_update("tdl_update", "critic loss", epoch, diag.minibatch_steps, cl.value);
      }
      descend(next.critic_opt, next.critic.net().params(), cl.grad);
      diag.policy_loss = rl.value;
      diag.critic_loss = cl.value;
      ++diag.minibatch_steps;
    }
  }

  // Global scale: sigma^2 is the batch mean of the target variances. A batch
  // where every sampled action hit its mean exactly would give zero, so the
  // scale is floored to keep the composed std positive.
  std::vector<double> sigma = mean_target_variance(targets);
  for (double& s : sigma) s = std::sqrt(std::max(s, 1e-24));
  if (!all_finite(sigma)) abort_update("tdl_update", "global std", ppo.epochs, diag.minibatch_steps, sigma.front());
  next.policy.set_global_std(std::move(sigma));

  diag.surrogate_after = -tdl_regression_loss(next.policy, batch, everything, targets).value;
  diag.mean_kl = mean_kl_old_to_new(next.policy, batch);
  if (!std::isfinite(diag.surrogate_after) || !std::isfinite(diag.mean_kl)) {
    abort_update("tdl_update", "post-update loss", ppo.epochs, diag.minibatch_steps, diag.surrogate_after);
  }
  task = std::move(next);
  return diag;
}

}  // namespace emot::mopg
