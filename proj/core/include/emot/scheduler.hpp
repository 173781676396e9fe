#pragma once

// Ordering of the UAV's onboard task queue on a single serial processor.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "emot/env_model.hpp"

namespace emot::sched {

struct QueueEntry {
  env::ComputeTask task;
  double enqueue_time = 0.0;     // >= task.arrival_time_s
  double processing_time = 0.0;  // compute delay, > 0
};

/// A permutation of queue indices; position j holds the j-th task to run.
using Schedule = std::vector<std::size_t>;

struct SaConfig {
  double t_init = 10.0;
  double t_min = 1e-3;
  double cooling = 0.95;
  int max_iters = 200;
  int inner_moves = 20;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

enum class SchedulerKind { SA, FCFS, SJF, PS };

std::string_view to_string(SchedulerKind kind);
/// Accepts "sa", "fcfs", "sjf", "ps" (case-insensitive).
SchedulerKind parse_scheduler_kind(std::string_view text);

bool is_permutation_of(const Schedule& sched, std::size_t n);

/// Total in-queue waiting time when tasks run serially in `sched` order on a
/// processor that becomes free at `start_time`. No task starts before it was
/// enqueued.
double schedule_cost(std::span<const QueueEntry> queue, const Schedule& sched, double start_time = 0.0);

/// Simulated annealing over swap moves, returning the cheapest permutation
/// visited. Deterministic for a fixed cfg.rng_seed.
Schedule sa_schedule(std::span<const QueueEntry> queue, const SaConfig& cfg, double start_time = 0.0);

/// Stable sort by enqueue time.
Schedule fcfs_schedule(std::span<const QueueEntry> queue);
/// Stable sort by processing time.
Schedule sjf_schedule(std::span<const QueueEntry> queue);
/// Stable sort by descending total cycle demand (data_bits * cycles_per_bit).
Schedule priority_schedule(std::span<const QueueEntry> queue);

Schedule make_schedule(SchedulerKind kind, std::span<const QueueEntry> queue, const SaConfig& cfg,
                       double start_time = 0.0);

}  // namespace emot::sched
