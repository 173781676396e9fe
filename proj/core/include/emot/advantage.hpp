#pragma once

// On-policy transition storage and per-objective advantage estimation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emot/policy.hpp"
#include "emot/weights.hpp"

namespace emot::nn {

using Matrix = std::vector<std::vector<double>>;  // [step][component]

struct TransitionBatch {
  Matrix states;
  Matrix next_states;
  Matrix actions;  // policy-space actions before any clipping
  Matrix rewards;  // one column per objective, already scaled for learning
  std::vector<std::uint8_t> dones;
  Matrix old_means;
  Matrix old_stds;
  std::vector<double> old_logprobs;

  [[nodiscard]] std::size_t size() const { return states.size(); }
  /// Throws std::invalid_argument on misaligned lengths or non-positive stds.
  void validate() const;
};

struct AdvantageEstimate {
  Matrix advantages;  // A[t][k]
  Matrix returns;     // lambda-returns A + V, critic targets
};

/// Generalized advantage estimation, independently per objective k:
///   delta_t = r_tk + gamma_k V_k(s_{t+1}) (1 - done_t) - V_k(s_t)
///   A_tk    = delta_t + gamma_k lambda (1 - done_t) A_{t+1,k}
AdvantageEstimate gae_per_objective(const Matrix& rewards, const Matrix& values, const Matrix& next_values,
                                    std::span<const std::uint8_t> dones, std::span<const double> gammas,
                                    double lambda);

AdvantageEstimate gae_per_objective(const TransitionBatch& batch, const VectorCritic& critic,
                                    std::span<const double> gammas, double lambda);

/// Bounded first-in-first-out transition store (default 1e5 entries). Kept
/// for logging and inspection; the on-policy updates never read from it.
class TransitionStore {
 public:
  struct Item {
    std::vector<double> state;
    std::vector<double> action;
    std::vector<double> reward;
    bool done = false;
  };

  explicit TransitionStore(std::size_t capacity = 100000);

  void push(Item item);
  /// Appends every step of `batch`.
  void push_batch(const TransitionBatch& batch);
  /// i = 0 is the oldest retained item.
  [[nodiscard]] const Item& at(std::size_t i) const;
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::uint64_t total_pushed() const { return pushed_; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::uint64_t pushed_ = 0;
  std::vector<Item> items_;
};

/// Scalar xi^T A per step. Throws std::invalid_argument on a dimension
/// mismatch.
std::vector<double> extended_advantage(const Matrix& vector_adv, const WeightVector& weight);

}  // namespace emot::nn
