#include "emot/pareto.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace emot::pareto {

bool dominates(const MaxPoint& p, const MaxPoint& q) {
  return p.x >= q.x && p.y >= q.y && (p.x > q.x || p.y > q.y);
}

bool dominates(const ObjectivePoint& p, const ObjectivePoint& q) { return dominates(to_max(p), to_max(q)); }

bool mutually_nondominated(std::span<const MaxPoint> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i != j && dominates(points[i], points[j])) return false;
    }
  }
  return true;
}

double hypervolume(std::span<const MaxPoint> points, const MaxPoint& ref) {
  std::vector<MaxPoint> sorted(points.begin(), points.end());
  for (const MaxPoint& p : sorted) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("hypervolume: non-finite point");
    if (p.x < ref.x || p.y < ref.y) throw std::invalid_argument("hypervolume: point does not dominate the reference");
  }
  std::sort(sorted.begin(), sorted.end(), [](const MaxPoint& a, const MaxPoint& b) {
    return a.x != b.x ? a.x > b.x : a.y > b.y;
  });
  double area = 0.0;
  double covered_y = ref.y;
  for (const MaxPoint& p : sorted) {
    if (p.y > covered_y) {
      area += (p.x - ref.x) * (p.y - covered_y);
      covered_y = p.y;
    }
  }
  return area;
}

std::optional<double> sparsity(std::span<const MaxPoint> points) {
  if (points.size() < 2) return std::nullopt;
  std::vector<double> xs, ys;
  for (const MaxPoint& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
    acc += (xs[j + 1] - xs[j]) * (xs[j + 1] - xs[j]);
    acc += (ys[j + 1] - ys[j]) * (ys[j + 1] - ys[j]);
  }
  return acc / static_cast<double>(points.size() - 1);
}

MaxPoint auto_reference(std::span<const MaxPoint> points) {
  if (points.empty()) throw std::invalid_argument("auto_reference: empty point set");
  auto axis = [&](auto get) {
    double lo = get(points.front()), hi = lo;
    for (const MaxPoint& p : points) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    const double range = hi - lo;
    const double margin = range > 0.0 ? 0.1 * range : std::max(0.1 * std::abs(lo), 1.0);
    return lo - margin;
  };
  return {axis([](const MaxPoint& p) { return p.x; }), axis([](const MaxPoint& p) { return p.y; })};
}

std::vector<std::size_t> crowding_select(std::span<const MaxPoint> points, std::size_t keep) {
  const std::size_t n = points.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (keep >= n) return all;
  std::vector<double> crowd(n, 0.0);
  auto accumulate_axis = [&](auto get) {
    std::vector<std::size_t> order = all;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return get(a) < get(b); });
    const double range = get(order.back()) - get(order.front());
    crowd[order.front()] = std::numeric_limits<double>::infinity();
    crowd[order.back()] = std::numeric_limits<double>::infinity();
    if (range <= 0.0) return;
    for (std::size_t j = 1; j + 1 < n; ++j) crowd[order[j]] += (get(order[j + 1]) - get(order[j - 1])) / range;
  };
  accumulate_axis([&](std::size_t i) { return points[i].x; });
  accumulate_axis([&](std::size_t i) { return points[i].y; });
  std::vector<std::size_t> order = all;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return crowd[a] > crowd[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

double sq_dist(const MaxPoint& a, const MaxPoint& b) {
  return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

std::size_t nearest(const std::vector<MaxPoint>& centers, const MaxPoint& p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < centers.size(); ++c) {
    if (sq_dist(p, centers[c]) < sq_dist(p, centers[best])) best = c;
  }
  return best;
}

}  // namespace

std::vector<std::size_t> kmeans(std::span<const MaxPoint> points, std::size_t k, int max_iters) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
  k = std::min(k, n);
  std::vector<MaxPoint> centers{points[0]};
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_d[i] = std::min(min_d[i], sq_dist(points[i], centers.back()));
      if (min_d[i] > far_d) {
        far_d = min_d[i];
        far = i;
      }
    }
    centers.push_back(points[far]);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(centers, points[i]);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<MaxPoint> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]].x += points[i].x;
      sums[assign[i]].y += points[i].y;
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an emptied cluster keeps its center
      centers[c] = {sums[c].x / static_cast<double>(counts[c]), sums[c].y / static_cast<double>(counts[c])};
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(centers, points[i]);
      changed = changed || c != assign[i];
      assign[i] = c;
    }
    if (!changed) break;
  }
  return assign;
}

ClusteredFront pareto_analysis(std::span<const ObjectivePoint> points, std::size_t k) {
  ClusteredFront front;
  const std::size_t n = points.size();
  if (n == 0) return front;
  k = std::max<std::size_t>(1, std::min(k, n));

  double lo1 = points[0].f1, hi1 = lo1, lo2 = points[0].f2, hi2 = lo2;
  for (const ObjectivePoint& p : points) {
    lo1 = std::min(lo1, p.f1);
    hi1 = std::max(hi1, p.f1);
    lo2 = std::min(lo2, p.f2);
    hi2 = std::max(hi2, p.f2);
  }
  const double s1 = hi1 > lo1 ? 1.0 / (hi1 - lo1) : 1.0;
  const double s2 = hi2 > lo2 ? 1.0 / (hi2 - lo2) : 1.0;
  std::vector<MaxPoint> scaled;
  scaled.reserve(n);
  for (const ObjectivePoint& p : points) scaled.push_back({(p.f1 - lo1) * s1, (p.f2 - lo2) * s2});

  const std::vector<std::size_t> assign = kmeans(scaled, k);
  std::vector<Cluster> clusters(k);
  for (std::size_t i = 0; i < n; ++i) clusters[assign[i]].members.push_back(i);
  std::erase_if(clusters, [](const Cluster& c) { return c.members.empty(); });
  for (Cluster& c : clusters) {
    std::stable_sort(c.members.begin(), c.members.end(), [&](std::size_t a, std::size_t b) {
      return points[a].f1 != points[b].f1 ? points[a].f1 < points[b].f1 : points[a].f2 < points[b].f2;
    });
    for (const std::size_t i : c.members) c.polyline.push_back(points[i]);
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.polyline.front().f1 < b.polyline.front().f1; });
  front.clusters = std::move(clusters);
  return front;
}

std::optional<double> interpolate_f2(const Cluster& cluster, double f1) {
  const std::vector<ObjectivePoint>& line = cluster.polyline;
  if (line.empty() || f1 < line.front().f1 || f1 > line.back().f1) return std::nullopt;
  for (std::size_t j = 0; j + 1 < line.size(); ++j) {
    const ObjectivePoint& a = line[j];
    const ObjectivePoint& b = line[j + 1];
    if (f1 >= a.f1 && f1 <= b.f1) {
      if (b.f1 == a.f1) return std::min(a.f2, b.f2);
      const double t = (f1 - a.f1) / (b.f1 - a.f1);
      return a.f2 + t * (b.f2 - a.f2);
    }
  }
  return line.front().f2;
}

}  // namespace emot::pareto
