#include "emot/advantage.hpp"

#include <cmath>
#include <stdexcept>

namespace emot {

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("WeightVector: empty");
  double sum = 0.0;
  for (const double x : w_) {
    if (!(x >= -1e-9)) throw std::invalid_argument("WeightVector: negative component");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("WeightVector: components must sum to 1");
}

double WeightVector::dot(std::span<const double> v) const {
  if (v.size() != w_.size()) throw std::invalid_argument("WeightVector::dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w_[i] * v[i];
  return s;
}

}  // namespace emot

namespace emot::nn {

void TransitionBatch::validate() const {
  const std::size_t n = states.size();
  if (next_states.size() != n || actions.size() != n || rewards.size() != n || dones.size() != n ||
      old_means.size() != n || old_stds.size() != n || old_logprobs.size() != n) {
    throw std::invalid_argument("TransitionBatch: misaligned lengths");
  }
  for (const auto& s : old_stds) {
    for (const double v : s) {
      if (!(v > 0.0)) throw std::invalid_argument("TransitionBatch: old stds must be positive");
    }
  }
}

AdvantageEstimate gae_per_objective(const Matrix& rewards, const Matrix& values, const Matrix& next_values,
                                    std::span<const std::uint8_t> dones, std::span<const double> gammas,
                                    double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae_per_objective: misaligned inputs");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("gae_per_objective: lambda must lie in [0, 1]");
  const std::size_t m = gammas.size();
  AdvantageEstimate out;
  out.advantages.assign(n, std::vector<double>(m, 0.0));
  out.returns.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    double running = 0.0;
    for (std::size_t t = n; t-- > 0;) {
      const double live = dones[t] ? 0.0 : 1.0;
      const double delta = rewards[t][k] + gammas[k] * next_values[t][k] * live - values[t][k];
      running = delta + gammas[k] * lambda * live * running;
      out.advantages[t][k] = running;
      out.returns[t][k] = running + values[t][k];
    }
  }
  return out;
}

AdvantageEstimate gae_per_objective(const TransitionBatch& batch, const VectorCritic& critic,
                                    std::span<const double> gammas, double lambda) {
  Matrix values;
  Matrix next_values;
  values.reserve(batch.size());
  next_values.reserve(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    values.push_back(critic.values(batch.states[t]));
    next_values.push_back(critic.values(batch.next_states[t]));
  }
  return gae_per_objective(batch.rewards, values, next_values, batch.dones, gammas, lambda);
}

std::vector<double> extended_advantage(const Matrix& vector_adv, const WeightVector& weight) {
  std::vector<double> out;
  out.reserve(vector_adv.size());
  for (const auto& a : vector_adv) out.push_back(weight.dot(a));
  return out;
}

TransitionStore::TransitionStore(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("TransitionStore: capacity must be >= 1");
}

void TransitionStore::push(Item item) {
  ++pushed_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(item));
    return;
  }
  items_[head_] = std::move(item);
  head_ = (head_ + 1) % capacity_;
}

void TransitionStore::push_batch(const TransitionBatch& batch) {
  batch.validate();
  for (std::size_t t = 0; t < batch.size(); ++t) {
    push({batch.states[t], batch.actions[t], batch.rewards[t], batch.dones[t] != 0});
  }
}

const TransitionStore::Item& TransitionStore::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("TransitionStore::at: index beyond size");
  return items_[(head_ + i) % items_.size()];
}

}  // namespace emot::nn
