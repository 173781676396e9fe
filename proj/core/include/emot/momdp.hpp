#pragma once

// Episodic vector-reward environment: one UAV, N ground devices, an onboard
// task queue re-ordered by a pluggable scheduler.
//
// Slot dynamics, in order:
//   1. the UAV moves; leaving the area yields the penalty reward (-W, -W),
//      marks the successor invalid and clamps the pose to the boundary;
//   2. if accept > 0.5 every device with a pending task inside coverage
//      uploads, all of them transmitting simultaneously;
//   3. uploaded tasks are enqueued at the slot start and the scheduler
//      re-orders the tasks that have not started yet;
//   4. the processor runs the queue serially for one slot of time;
//   5. the reward is emitted and the slot is recorded in the ledger;
//   6. tasks still pending on devices accrue one slot of waiting time.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "emot/env_model.hpp"
#include "emot/scheduler.hpp"

namespace emot::momdp {

struct TaskGenConfig {
  int period_slots = 10;
  double min_bits = 1e6;
  double max_bits = 5e6;
  double min_cycles_per_bit = 500.0;
  double max_cycles_per_bit = 1500.0;

  void validate() const;
};

/// Slot: reward is (-D_t, -E_t) over the uploads of the slot only.
/// Objective: reward additionally carries the slot's waiting, queueing and
/// flight terms so that the undiscounted return equals -(f1, f2).
enum class RewardMode { Slot, Objective };

struct RewardConfig {
  double penalty_w = 1e4;
  std::array<double, 2> discounts{0.99, 0.99};
  RewardMode mode = RewardMode::Objective;
  /// Multipliers applied to rewards and objectives before learning and
  /// weighted selection. Ledgers and reported objectives stay in SI units.
  std::array<double, 2> learning_scales{0.1, 0.01};

  void validate() const;
};

struct EnvConfig {
  int n_gds = 10;
  int horizon = 100;
  env::UavLimits limits;
  env::ChannelParams channel;
  env::PropulsionParams propulsion;
  env::ComputeParams compute;
  double gd_transmit_power_w = 0.1;
  TaskGenConfig task_gen;
  RewardConfig reward;
  sched::SchedulerKind scheduler_kind = sched::SchedulerKind::SA;
  sched::SaConfig sa;
  std::uint64_t layout_seed = 1;  // ground device placement

  void validate() const;
};

struct GdStatus {
  double arrival_time_s = 0.0;  // zeros when the device has nothing pending
  double data_bits = 0.0;
};

struct EnvState {
  env::Position3 uav_pose;
  std::size_t queue_len = 0;
  std::vector<GdStatus> gd_status;
  int clock = 0;
  bool invalid = false;  // member of the invalid-state set after a boundary exit
};

struct ActionTuple {
  double theta = 0.0;
  double dist = 0.0;
  double accept = 0.0;
};

/// Clips each raw component into [0, 2pi], [0, d_max], [0, 1].
ActionTuple decode_action(const std::array<double, 3>& raw, const env::UavLimits& limits);

struct VectorReward {
  double r_delay = 0.0;
  double r_energy = 0.0;
};

struct SlotRecord {
  int clock = 0;
  env::Position3 pose;             // after the move, clamped
  std::vector<int> accepted_tasks;  // episode-local task ids
  std::vector<int> accepted_gds;
  double upload_delay = 0.0;        // D_t: G2A plus compute delay of the uploads
  double wait_delay = 0.0;          // waiting accrued by tasks still on devices
  double queue_delay = 0.0;         // in-queue waiting accrued during the slot
  double compute_energy = 0.0;
  double receive_energy = 0.0;
  double flight_energy = 0.0;
  bool penalized = false;

  [[nodiscard]] double slot_energy() const { return compute_energy + receive_energy; }  // E_t
};

struct EpisodeLedger {
  int horizon = 0;
  env::Position3 initial_pose;
  std::vector<SlotRecord> slots;
  std::vector<double> scheduling_delays;  // D_i^s of every task that started computing
  double unstarted_queue_wait = 0.0;      // accrued by tasks still queued at the end
  int tasks_generated = 0;
  int tasks_uploaded = 0;
  int tasks_completed = 0;
  double f1_running = 0.0;  // incrementally accumulated objectives
  double f2_running = 0.0;

  [[nodiscard]] bool complete() const { return horizon > 0 && static_cast<int>(slots.size()) == horizon; }
};

struct Objectives {
  double f1 = 0.0;  // seconds
  double f2 = 0.0;  // joules
};

/// Recomputes (f1, f2) from the per-slot records. Throws std::logic_error for
/// an incomplete episode.
Objectives episode_objectives(const EpisodeLedger& ledger);

struct StepResult {
  EnvState next;
  VectorReward reward;
  bool done = false;
};

class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  [[nodiscard]] const EnvConfig& config() const { return cfg_; }
  [[nodiscard]] std::span<const env::GroundDevice> devices() const { return devices_; }

  EnvState reset(std::uint64_t seed);
  StepResult step(const ActionTuple& action);

  [[nodiscard]] const EnvState& state() const { return state_; }
  [[nodiscard]] const EpisodeLedger& ledger() const { return ledger_; }
  [[nodiscard]] bool done() const { return state_.clock >= cfg_.horizon; }

  /// Fixed affine normalization: positions by area extents, queue length by
  /// N, clock by horizon, arrival times by horizon * tau, sizes by max_bits.
  [[nodiscard]] std::vector<double> encode(const EnvState& s) const;
  [[nodiscard]] std::size_t observation_dim() const { return 4 + 2 * static_cast<std::size_t>(cfg_.n_gds); }

  /// Whether any device with a pending task lies inside coverage of `pose`.
  [[nodiscard]] bool pending_in_range(const env::Position3& pose) const;

 private:
  struct PendingTask {
    int id = 0;
    env::ComputeTask task;
  };
  struct QueuedTask {
    int id = 0;
    sched::QueueEntry entry;
  };
  struct RunningTask {
    QueuedTask task;
    double remaining = 0.0;
  };

  void generate_tasks();
  void reschedule();
  double run_processor(double slot_start);
  void refresh_state();

  EnvConfig cfg_;
  std::vector<env::GroundDevice> devices_;

  std::uint64_t episode_seed_ = 0;
  std::vector<std::vector<env::ComputeTask>> timelines_;  // pre-drawn tasks per device
  std::vector<std::size_t> next_draw_;
  std::vector<int> next_due_;
  std::vector<std::optional<PendingTask>> pending_;
  std::optional<RunningTask> running_;
  std::vector<QueuedTask> waiting_;
  int next_task_id_ = 0;

  EnvState state_;
  EpisodeLedger ledger_;
  bool started_ = false;
};

struct Transition {
  EnvState state;
  ActionTuple action;
  VectorReward reward;
  EnvState next_state;
  bool done = false;
};

using ActionSource = std::function<ActionTuple(const EnvState&, const Environment&)>;

struct RolloutResult {
  EpisodeLedger ledger;
  std::vector<Transition> transitions;
};

/// reset(seed) followed by `horizon` steps.
RolloutResult rollout(const ActionSource& policy, const EnvConfig& cfg, std::uint64_t seed);

}  // namespace emot::momdp
