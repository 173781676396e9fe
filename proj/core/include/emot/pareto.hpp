#pragma once

// Two-objective Pareto utilities. Objectives are minimized (delay in seconds,
// energy in joules); dominance, hypervolume and sparsity work in the
// maximization coordinates (-f1, -f2).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace emot::pareto {

struct ObjectivePoint {
  double f1 = 0.0;
  double f2 = 0.0;

  friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

struct MaxPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const MaxPoint&, const MaxPoint&) = default;
};

inline MaxPoint to_max(const ObjectivePoint& p) { return {-p.f1, -p.f2}; }
inline ObjectivePoint to_objective(const MaxPoint& p) { return {-p.x, -p.y}; }

/// p >= q componentwise with at least one strict inequality.
bool dominates(const MaxPoint& p, const MaxPoint& q);
bool dominates(const ObjectivePoint& p, const ObjectivePoint& q);

/// Non-dominated set with arbitrary payloads. A candidate equal to or
/// dominated by a member is rejected, so identical points keep the earlier
/// entry; members dominated by an accepted candidate are dropped.
template <class Payload>
class ParetoArchive {
 public:
  struct Entry {
    MaxPoint point;
    Payload payload;
  };

  bool insert(const MaxPoint& point, Payload payload) {
    for (const Entry& e : entries_) {
      if (e.point == point || dominates(e.point, point)) return false;
    }
    std::erase_if(entries_, [&](const Entry& e) { return dominates(point, e.point); });
    entries_.push_back({point, std::move(payload)});
    return true;
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  [[nodiscard]] std::vector<MaxPoint> points() const {
    std::vector<MaxPoint> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.point);
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

/// True when no point of the set dominates another.
bool mutually_nondominated(std::span<const MaxPoint> points);

/// Area of the union of boxes [ref, p]. Throws std::invalid_argument when a
/// point is below `ref` in either coordinate.
double hypervolume(std::span<const MaxPoint> points, const MaxPoint& ref);

/// (1/(n-1)) * sum_k sum_j (P_k(j) - P_k(j+1))^2 over each coordinate sorted
/// independently; absent for fewer than two points.
std::optional<double> sparsity(std::span<const MaxPoint> points);

/// Componentwise worst value minus 10% of the range. A degenerate range uses
/// max(0.1 * |worst|, 1) as the margin.
MaxPoint auto_reference(std::span<const MaxPoint> points);

/// Indices of the `keep` members with the largest crowding distance
/// (boundary members first), in ascending index order.
std::vector<std::size_t> crowding_select(std::span<const MaxPoint> points, std::size_t keep);

/// Lloyd iterations seeded by farthest-point initialization (first center is
/// point 0, ties broken by lowest index). Returns the cluster of each point.
std::vector<std::size_t> kmeans(std::span<const MaxPoint> points, std::size_t k, int max_iters = 100);

struct Cluster {
  std::vector<std::size_t> members;  // indices into the analysed set, sorted by f1
  std::vector<ObjectivePoint> polyline;
};

struct ClusteredFront {
  std::vector<Cluster> clusters;
};

/// k-means on min-max normalized objectives (k clamped to the set size),
/// then a piecewise-linear polyline per cluster through its members sorted by
/// f1. Clusters are ordered by their smallest f1.
ClusteredFront pareto_analysis(std::span<const ObjectivePoint> points, std::size_t k);

/// Linear interpolation of f2 along a polyline sorted by f1; absent outside
/// its f1 span.
std::optional<double> interpolate_f2(const Cluster& cluster, double f1);

}  // namespace emot::pareto
