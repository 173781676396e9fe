#include "emot/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "emot/seeds.hpp"

namespace emot::nn {

namespace {

MlpSpec spec_for(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  MlpSpec spec;
  spec.widths.push_back(in);
  spec.widths.insert(spec.widths.end(), hidden.begin(), hidden.end());
  spec.widths.push_back(out);
  return spec;
}

}  // namespace

double composed_std(double global_std, double raw_std, double phi) {
  return std::pow(global_std, 1.0 / (phi + 1.0)) * std::pow(raw_std, phi / (phi + 1.0));
}

GaussianPolicy::GaussianPolicy(Mlp mean_net, Mlp std_net, std::vector<double> global_std, double phi)
    : mean_net_(std::move(mean_net)), std_net_(std::move(std_net)), global_std_(std::move(global_std)), phi_(phi) {
  if (mean_net_.spec().input_dim() != std_net_.spec().input_dim() ||
      mean_net_.spec().output_dim() != std_net_.spec().output_dim()) {
    throw std::invalid_argument("GaussianPolicy: mean and std heads disagree on dimensions");
  }
  if (global_std_.size() != action_dim()) throw std::invalid_argument("GaussianPolicy: global std size mismatch");
  if (!(phi_ > 0.0)) throw std::invalid_argument("GaussianPolicy: phi must be > 0");
  set_global_std(global_std_);
}

GaussianPolicy GaussianPolicy::make(std::size_t state_dim, std::size_t action_dim, const std::vector<std::size_t>& hidden,
                                    double init_global_std, double phi, std::uint64_t seed) {
  Mlp mean = Mlp::glorot(spec_for(state_dim, hidden, action_dim), derive_seed(seed, "policy-mean"));
  Mlp spread = Mlp::glorot(spec_for(state_dim, hidden, action_dim), derive_seed(seed, "policy-std"));
  return GaussianPolicy(std::move(mean), std::move(spread), std::vector<double>(action_dim, init_global_std), phi);
}

void GaussianPolicy::set_global_std(std::vector<double> sigma) {
  if (sigma.size() != action_dim()) throw std::invalid_argument("GaussianPolicy: global std size mismatch");
  for (const double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("GaussianPolicy: global std must be positive");
  }
  global_std_ = std::move(sigma);
}

PolicyOutput GaussianPolicy::forward(std::span<const double> state) const {
  PolicyPass pass;
  return forward(state, pass);
}

PolicyOutput GaussianPolicy::forward(std::span<const double> state, PolicyPass& pass) const {
  pass.out.mean = mean_net_.forward(state, pass.mean_tape);
  const std::vector<double> z = std_net_.forward(state, pass.std_tape);
  const std::size_t d = z.size();
  pass.out.raw_std.resize(d);
  pass.out.std.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    // Floor keeps log-densities finite when the head saturates negative.
    pass.out.raw_std[k] = softplus(z[k]) + 1e-12;
    pass.out.std[k] = composed_std(global_std_[k], pass.out.raw_std[k], phi_);
  }
  return pass.out;
}

void GaussianPolicy::backward(const PolicyPass& pass, std::span<const double> d_mean, std::span<const double> d_std,
                              std::span<const double> d_raw_std, PolicyGrad& grad) const {
  const std::size_t d = action_dim();
  if (!d_mean.empty()) mean_net_.backward(pass.mean_tape, d_mean, grad.mean);
  if (d_std.empty() && d_raw_std.empty()) return;
  const std::vector<double>& z = pass.std_tape.layers.back();
  std::vector<double> d_z(d, 0.0);
  const double exponent = phi_ / (phi_ + 1.0);
  for (std::size_t k = 0; k < d; ++k) {
    double d_raw = d_raw_std.empty() ? 0.0 : d_raw_std[k];
    if (!d_std.empty()) d_raw += d_std[k] * exponent * pass.out.std[k] / pass.out.raw_std[k];
    d_z[k] = d_raw * sigmoid(z[k]);
  }
  std_net_.backward(pass.std_tape, d_z, grad.std);
}

PolicyGrad GaussianPolicy::zero_grad() const {
  return {ParamVector(mean_net_.params().size(), 0.0), ParamVector(std_net_.params().size(), 0.0)};
}

double gaussian_logprob(std::span<const double> action, std::span<const double> mean, std::span<const double> std) {
  double lp = 0.0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double u = (action[k] - mean[k]) / std[k];
    lp += -0.5 * u * u - std::log(std[k]) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

double gaussian_kl(std::span<const double> mean_p, std::span<const double> std_p, std::span<const double> mean_q,
                   std::span<const double> std_q) {
  double kl = 0.0;
  for (std::size_t k = 0; k < mean_p.size(); ++k) {
    const double dm = mean_p[k] - mean_q[k];
    kl += std::log(std_q[k] / std_p[k]) + (std_p[k] * std_p[k] + dm * dm) / (2.0 * std_q[k] * std_q[k]) - 0.5;
  }
  return kl;
}

ActionSample sample_and_logprob(const GaussianPolicy& policy, std::span<const double> state, std::mt19937_64& rng) {
  ActionSample s;
  s.dist = policy.forward(state);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.action.resize(s.dist.mean.size());
  for (std::size_t k = 0; k < s.action.size(); ++k) s.action[k] = s.dist.mean[k] + s.dist.std[k] * normal(rng);
  s.logprob = gaussian_logprob(s.action, s.dist.mean, s.dist.std);
  return s;
}

VectorCritic VectorCritic::make(std::size_t state_dim, std::size_t n_objectives, const std::vector<std::size_t>& hidden,
                                std::uint64_t seed) {
  return VectorCritic(Mlp::glorot(spec_for(state_dim, hidden, n_objectives), derive_seed(seed, "critic")));
}

}  // namespace emot::nn
