#pragma once

// Fully connected tanh networks with exact reverse-mode gradients.
//
// Parameter layout: for each layer l (input to output), the weight matrix of
// shape [out][in] in row-major order followed by the out biases.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emot::nn {

using ParamVector = std::vector<double>;

struct MlpSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output

  [[nodiscard]] std::size_t input_dim() const { return widths.front(); }
  [[nodiscard]] std::size_t output_dim() const { return widths.back(); }
  [[nodiscard]] std::size_t param_count() const;
  /// Throws std::invalid_argument unless there is at least one hidden layer
  /// and every width is >= 1.
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Activations of every layer from one forward pass, consumed by backward().
struct Tape {
  std::vector<std::vector<double>> layers;  // layers[0] = input, back() = output
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, ParamVector params);

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(MlpSpec spec, std::uint64_t seed);
  static Mlp zeros(MlpSpec spec);

  [[nodiscard]] const MlpSpec& spec() const { return spec_; }
  [[nodiscard]] const ParamVector& params() const { return params_; }
  ParamVector& params() { return params_; }

  [[nodiscard]] std::vector<double> forward(std::span<const double> input) const;
  [[nodiscard]] std::vector<double> forward(std::span<const double> input, Tape& tape) const;

  /// Adds d(loss)/d(params) to `grad` given d(loss)/d(output) for the pass
  /// recorded in `tape`.
  void backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const;

 private:
  MlpSpec spec_;
  ParamVector params_;
};

/// Adaptive-moment optimizer minimizing a loss. Ascent callers negate the
/// gradient.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t n, double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad);
  [[nodiscard]] double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 1e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

double softplus(double z);
double sigmoid(double z);

}  // namespace emot::nn
