#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace emot {

/// Preference over objectives: non-negative components summing to one.
class WeightVector {
 public:
  WeightVector() = default;
  /// Throws std::invalid_argument unless `w` lies on the simplex within 1e-9.
  explicit WeightVector(std::vector<double> w);

  [[nodiscard]] std::size_t size() const { return w_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return w_[i]; }
  [[nodiscard]] std::span<const double> values() const { return w_; }
  [[nodiscard]] double dot(std::span<const double> v) const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> w_;
};

}  // namespace emot
