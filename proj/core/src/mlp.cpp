#include "emot/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace emot::nn {

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) n += widths[l] * widths[l - 1] + widths[l];
  return n;
}

void MlpSpec::validate() const {
  if (widths.size() < 3) throw std::invalid_argument("MlpSpec: need input, >= 1 hidden and output layer");
  for (const std::size_t w : widths) {
    if (w < 1) throw std::invalid_argument("MlpSpec: widths must be >= 1");
  }
}

Mlp::Mlp(MlpSpec spec, ParamVector params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.size() != spec_.param_count()) throw std::invalid_argument("Mlp: parameter count does not match spec");
}

Mlp Mlp::glorot(MlpSpec spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p(spec.param_count(), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 1; l < spec.widths.size(); ++l) {
    const std::size_t in = spec.widths[l - 1];
    const std::size_t out = spec.widths[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = 0; k < in * out; ++k) p[off + k] = u(rng);
    off += in * out + out;
  }
  return Mlp(std::move(spec), std::move(p));
}

Mlp Mlp::zeros(MlpSpec spec) {
  const std::size_t n = spec.param_count();
  return Mlp(std::move(spec), ParamVector(n, 0.0));
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Tape tape;
  return forward(input, tape);
}

std::vector<double> Mlp::forward(std::span<const double> input, Tape& tape) const {
  if (input.size() != spec_.input_dim()) throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  const std::size_t n_layers = spec_.widths.size();
  tape.layers.resize(n_layers);
  tape.layers[0].assign(input.begin(), input.end());
  std::size_t off = 0;
  for (std::size_t l = 1; l < n_layers; ++l) {
    const std::size_t in = spec_.widths[l - 1];
    const std::size_t out = spec_.widths[l];
    const std::vector<double>& x = tape.layers[l - 1];
    std::vector<double>& y = tape.layers[l];
    y.assign(out, 0.0);
    const double* w = params_.data() + off;
    const double* b = w + in * out;
    const bool hidden = l + 1 < n_layers;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = hidden ? std::tanh(acc) : acc;
    }
    off += in * out + out;
  }
  return tape.layers.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("Mlp::backward: gradient size mismatch");
  if (grad_output.size() != spec_.output_dim()) throw std::invalid_argument("Mlp::backward: output gradient mismatch");
  const std::size_t n_layers = spec_.widths.size();
  std::vector<double> delta(grad_output.begin(), grad_output.end());  // d loss / d pre-activation
  std::size_t off = params_.size();
  std::vector<double> prev;
  for (std::size_t l = n_layers - 1; l >= 1; --l) {
    const std::size_t in = spec_.widths[l - 1];
    const std::size_t out = spec_.widths[l];
    off -= in * out + out;
    const std::vector<double>& x = tape.layers[l - 1];
    const double* w = params_.data() + off;
    double* gw = grad.data() + off;
    double* gb = gw + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += delta[o] * x[i];
    }
    if (l == 1) break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
    }
    // x is the tanh output of layer l-1.
    for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - x[i] * x[i];
    delta.swap(prev);
  }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam::step: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace emot::nn
