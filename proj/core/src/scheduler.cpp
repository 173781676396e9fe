#include "emot/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace emot::sched {

namespace {

void require_non_empty(std::span<const QueueEntry> queue, const char* who) {
  if (queue.empty()) throw std::invalid_argument(std::string(who) + ": empty queue");
}

Schedule identity(std::size_t n) {
  Schedule s(n);
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

template <typename Less>
Schedule stable_order(std::span<const QueueEntry> queue, Less less) {
  Schedule s = identity(queue.size());
  std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) { return less(queue[a], queue[b]); });
  return s;
}

}  // namespace

void SaConfig::validate() const {
  if (!(t_min > 0.0 && t_min < t_init)) throw std::invalid_argument("SaConfig: require 0 < t_min < t_init");
  if (!(cooling > 0.0 && cooling < 1.0)) throw std::invalid_argument("SaConfig: cooling must lie in (0, 1)");
  if (inner_moves < 1) throw std::invalid_argument("SaConfig: inner_moves must be >= 1");
  if (max_iters < 0) throw std::invalid_argument("SaConfig: max_iters must be >= 0");
}

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::SA: return "sa";
    case SchedulerKind::FCFS: return "fcfs";
    case SchedulerKind::SJF: return "sjf";
    case SchedulerKind::PS: return "ps";
  }
  return "?";
}

SchedulerKind parse_scheduler_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sa") return SchedulerKind::SA;
  if (lower == "fcfs") return SchedulerKind::FCFS;
  if (lower == "sjf") return SchedulerKind::SJF;
  if (lower == "ps") return SchedulerKind::PS;
  throw std::invalid_argument("unknown scheduler kind '" + lower + "' (expected sa, fcfs, sjf or ps)");
}

bool is_permutation_of(const Schedule& sched, std::size_t n) {
  if (sched.size() != n) return false;
  Schedule sorted = sched;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i] != i) return false;
  }
  return true;
}

double schedule_cost(std::span<const QueueEntry> queue, const Schedule& sched, double start_time) {
  if (sched.size() != queue.size()) throw std::invalid_argument("schedule_cost: permutation length mismatch");
  if (!is_permutation_of(sched, queue.size())) throw std::invalid_argument("schedule_cost: not a permutation");
  double clock = start_time;
  double cost = 0.0;
  for (const std::size_t idx : sched) {
    const QueueEntry& e = queue[idx];
    const double start = std::max(clock, e.enqueue_time);
    cost += start - e.enqueue_time;
    clock = start + e.processing_time;
  }
  return cost;
}

Schedule sa_schedule(std::span<const QueueEntry> queue, const SaConfig& cfg, double start_time) {
  require_non_empty(queue, "sa_schedule");
  cfg.validate();
  const std::size_t n = queue.size();
  Schedule current = identity(n);
  if (n == 1) return current;

  std::mt19937_64 rng(cfg.rng_seed);
  std::shuffle(current.begin(), current.end(), rng);
  double current_cost = schedule_cost(queue, current, start_time);
  Schedule best = current;
  double best_cost = current_cost;

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> pick_other(0, n - 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double temperature = cfg.t_init;
  int iter = 0;
  Schedule candidate;
  while (temperature > cfg.t_min && iter < cfg.max_iters) {
    for (int k = 0; k < cfg.inner_moves; ++k) {
      const std::size_t i = pick(rng);
      std::size_t j = pick_other(rng);
      if (j >= i) ++j;
      candidate = current;
      std::swap(candidate[i], candidate[j]);
      const double candidate_cost = schedule_cost(queue, candidate, start_time);
      const double delta = candidate_cost - current_cost;
      bool accept = true;
      if (delta >= 0.0) accept = std::exp(-delta / temperature) >= unit(rng);
      if (accept) {
        current.swap(candidate);
        current_cost = candidate_cost;
        if (current_cost < best_cost) {
          best = current;
          best_cost = current_cost;
        }
      }
    }
    temperature *= cfg.cooling;
    ++iter;
  }
  return best;
}

Schedule fcfs_schedule(std::span<const QueueEntry> queue) {
  require_non_empty(queue, "fcfs_schedule");
  return stable_order(queue, [](const QueueEntry& a, const QueueEntry& b) { return a.enqueue_time < b.enqueue_time; });
}

Schedule sjf_schedule(std::span<const QueueEntry> queue) {
  require_non_empty(queue, "sjf_schedule");
  return stable_order(queue,
                      [](const QueueEntry& a, const QueueEntry& b) { return a.processing_time < b.processing_time; });
}

Schedule priority_schedule(std::span<const QueueEntry> queue) {
  require_non_empty(queue, "priority_schedule");
  return stable_order(queue, [](const QueueEntry& a, const QueueEntry& b) {
    return a.task.data_bits * a.task.cycles_per_bit > b.task.data_bits * b.task.cycles_per_bit;
  });
}

Schedule make_schedule(SchedulerKind kind, std::span<const QueueEntry> queue, const SaConfig& cfg,
                       double start_time) {
  switch (kind) {
    case SchedulerKind::SA: return sa_schedule(queue, cfg, start_time);
    case SchedulerKind::FCFS: return fcfs_schedule(queue);
    case SchedulerKind::SJF: return sjf_schedule(queue);
    case SchedulerKind::PS: return priority_schedule(queue);
  }
  throw std::invalid_argument("make_schedule: unknown scheduler kind");
}

}  // namespace emot::sched
