#pragma once

// Diagonal Gaussian policy with state-dependent mean and spread, and the
// m-output value critic.
//
// The sampling std is the damped composition
//     std(s) = sigma^(1/(phi+1)) * raw(s)^(phi/(phi+1)),
// where raw(s) = softplus(std head) and sigma is a per-dimension global scale
// refreshed after every target-distribution update.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "emot/mlp.hpp"

namespace emot::nn {

struct PolicyOutput {
  std::vector<double> mean;
  std::vector<double> std;      // composed std used for sampling
  std::vector<double> raw_std;  // softplus head output
};

/// Intermediate values of one policy evaluation, for backpropagation.
struct PolicyPass {
  Tape mean_tape;
  Tape std_tape;
  PolicyOutput out;
};

struct PolicyGrad {
  ParamVector mean;
  ParamVector std;
};

class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(Mlp mean_net, Mlp std_net, std::vector<double> global_std, double phi);

  /// Glorot-initialized policy; both heads share `hidden` widths and tanh.
  static GaussianPolicy make(std::size_t state_dim, std::size_t action_dim, const std::vector<std::size_t>& hidden,
                             double init_global_std, double phi, std::uint64_t seed);

  [[nodiscard]] std::size_t state_dim() const { return mean_net_.spec().input_dim(); }
  [[nodiscard]] std::size_t action_dim() const { return mean_net_.spec().output_dim(); }

  [[nodiscard]] PolicyOutput forward(std::span<const double> state) const;
  PolicyOutput forward(std::span<const double> state, PolicyPass& pass) const;

  /// Accumulates parameter gradients given loss derivatives w.r.t. the mean,
  /// the composed std and the raw std of one recorded pass. Any of the three
  /// spans may be empty.
  void backward(const PolicyPass& pass, std::span<const double> d_mean, std::span<const double> d_std,
                std::span<const double> d_raw_std, PolicyGrad& grad) const;

  [[nodiscard]] PolicyGrad zero_grad() const;

  [[nodiscard]] const Mlp& mean_net() const { return mean_net_; }
  [[nodiscard]] const Mlp& std_net() const { return std_net_; }
  Mlp& mean_net() { return mean_net_; }
  Mlp& std_net() { return std_net_; }
  [[nodiscard]] const std::vector<double>& global_std() const { return global_std_; }
  void set_global_std(std::vector<double> sigma);
  [[nodiscard]] double phi() const { return phi_; }

 private:
  Mlp mean_net_;
  Mlp std_net_;
  std::vector<double> global_std_;
  double phi_ = 1.0;
};

double composed_std(double global_std, double raw_std, double phi);

/// Log density of a diagonal Gaussian.
double gaussian_logprob(std::span<const double> action, std::span<const double> mean, std::span<const double> std);

/// Diagonal-Gaussian KL(N(mean_p, std_p) || N(mean_q, std_q)).
double gaussian_kl(std::span<const double> mean_p, std::span<const double> std_p, std::span<const double> mean_q,
                   std::span<const double> std_q);

struct ActionSample {
  std::vector<double> action;  // unclipped
  double logprob = 0.0;
  PolicyOutput dist;
};

ActionSample sample_and_logprob(const GaussianPolicy& policy, std::span<const double> state, std::mt19937_64& rng);

class VectorCritic {
 public:
  VectorCritic() = default;
  explicit VectorCritic(Mlp net) : net_(std::move(net)) {}
  static VectorCritic make(std::size_t state_dim, std::size_t n_objectives, const std::vector<std::size_t>& hidden,
                           std::uint64_t seed);

  [[nodiscard]] std::vector<double> values(std::span<const double> state) const { return net_.forward(state); }
  [[nodiscard]] std::size_t n_objectives() const { return net_.spec().output_dim(); }
  [[nodiscard]] const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

 private:
  Mlp net_;
};

}  // namespace emot::nn
