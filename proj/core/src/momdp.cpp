#include "emot/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "emot/seeds.hpp"

namespace emot::momdp {

void TaskGenConfig::validate() const {
  if (period_slots < 1) throw std::invalid_argument("TaskGenConfig: period_slots must be >= 1");
  if (!(min_bits > 0.0 && max_bits >= min_bits)) throw std::invalid_argument("TaskGenConfig: invalid size range");
  if (!(min_cycles_per_bit > 0.0 && max_cycles_per_bit >= min_cycles_per_bit)) {
    throw std::invalid_argument("TaskGenConfig: invalid cycles_per_bit range");
  }
}

void RewardConfig::validate() const {
  if (!(penalty_w > 0.0)) throw std::invalid_argument("RewardConfig: penalty_w must be > 0");
  for (const double g : discounts) {
    if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("RewardConfig: discounts must lie in [0, 1]");
  }
  for (const double s : learning_scales) {
    if (!(s > 0.0)) throw std::invalid_argument("RewardConfig: learning_scales must be > 0");
  }
}

void EnvConfig::validate() const {
  if (n_gds < 1) throw std::invalid_argument("EnvConfig: n_gds must be >= 1");
  if (horizon < 1) throw std::invalid_argument("EnvConfig: horizon must be >= 1");
  if (!(gd_transmit_power_w > 0.0)) throw std::invalid_argument("EnvConfig: gd_transmit_power_w must be > 0");
  env::validate(limits);
  env::validate(channel);
  env::validate(propulsion);
  env::validate(compute);
  task_gen.validate();
  reward.validate();
  sa.validate();
}

ActionTuple decode_action(const std::array<double, 3>& raw, const env::UavLimits& limits) {
  // NaN would survive std::clamp; map it to the lower bound.
  auto clip = [](double v, double lo, double hi) { return std::isnan(v) ? lo : std::clamp(v, lo, hi); };
  return {clip(raw[0], 0.0, 2.0 * std::numbers::pi), clip(raw[1], 0.0, limits.d_max()), clip(raw[2], 0.0, 1.0)};
}

Objectives episode_objectives(const EpisodeLedger& ledger) {
  if (!ledger.complete()) throw std::logic_error("episode_objectives: episode is not complete");
  Objectives out;
  for (const SlotRecord& s : ledger.slots) {
    out.f1 += s.upload_delay + s.wait_delay + s.queue_delay;
    out.f2 += s.slot_energy() + s.flight_energy;
  }
  return out;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::mt19937_64 rng(derive_seed(cfg_.layout_seed, "layout"));
  std::uniform_real_distribution<double> ux(0.0, cfg_.limits.x_max);
  std::uniform_real_distribution<double> uy(0.0, cfg_.limits.y_max);
  devices_.reserve(static_cast<std::size_t>(cfg_.n_gds));
  for (int i = 0; i < cfg_.n_gds; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    devices_.push_back({i, {x, y, 0.0}, cfg_.gd_transmit_power_w});
  }
}

EnvState Environment::reset(std::uint64_t seed) {
  episode_seed_ = seed;
  const auto n = static_cast<std::size_t>(cfg_.n_gds);
  const auto& tg = cfg_.task_gen;

  std::mt19937_64 pose_rng(derive_seed(seed, "uav-start"));
  std::uniform_real_distribution<double> ux(0.0, cfg_.limits.x_max);
  std::uniform_real_distribution<double> uy(0.0, cfg_.limits.y_max);
  const double x0 = ux(pose_rng);
  const double y0 = uy(pose_rng);

  // At most one generation per slot per device, so `horizon` draws suffice.
  timelines_.assign(n, {});
  next_draw_.assign(n, 0);
  next_due_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, "tasks", {i}));
    std::uniform_int_distribution<int> phase(0, tg.period_slots - 1);
    std::uniform_real_distribution<double> bits(tg.min_bits, tg.max_bits);
    std::uniform_real_distribution<double> cpb(tg.min_cycles_per_bit, tg.max_cycles_per_bit);
    next_due_[i] = phase(rng);
    timelines_[i].reserve(static_cast<std::size_t>(cfg_.horizon));
    for (int k = 0; k < cfg_.horizon; ++k) {
      const double o = bits(rng);
      const double mu = cpb(rng);
      timelines_[i].push_back({static_cast<int>(i), o, mu, 0.0});
    }
  }
  pending_.assign(n, std::nullopt);
  running_.reset();
  waiting_.clear();
  next_task_id_ = 0;

  state_ = EnvState{};
  state_.uav_pose = {x0, y0, cfg_.limits.altitude_m};
  state_.gd_status.assign(n, GdStatus{});
  ledger_ = EpisodeLedger{};
  ledger_.horizon = cfg_.horizon;
  ledger_.initial_pose = state_.uav_pose;
  ledger_.slots.reserve(static_cast<std::size_t>(cfg_.horizon));
  started_ = true;

  generate_tasks();
  refresh_state();
  return state_;
}

void Environment::generate_tasks() {
  const double now = state_.clock * cfg_.limits.slot_seconds;
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    if (pending_[i] || state_.clock < next_due_[i]) continue;
    env::ComputeTask task = timelines_[i][next_draw_[i]++];
    task.arrival_time_s = now;
    pending_[i] = PendingTask{next_task_id_++, task};
    next_due_[i] = state_.clock + cfg_.task_gen.period_slots;
    ++ledger_.tasks_generated;
  }
}

void Environment::refresh_state() {
  state_.queue_len = waiting_.size() + (running_ ? 1 : 0);
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    state_.gd_status[i] = pending_[i] ? GdStatus{pending_[i]->task.arrival_time_s, pending_[i]->task.data_bits}
                                      : GdStatus{};
  }
}

void Environment::reschedule() {
  if (waiting_.size() < 2) return;
  const double now = state_.clock * cfg_.limits.slot_seconds;
  const double free_at = now + (running_ ? running_->remaining : 0.0);
  std::vector<sched::QueueEntry> entries;
  entries.reserve(waiting_.size());
  for (const QueuedTask& q : waiting_) entries.push_back(q.entry);
  sched::SaConfig sa = cfg_.sa;
  sa.rng_seed = derive_seed(episode_seed_, "sa", {static_cast<std::uint64_t>(state_.clock)});
  const sched::Schedule order = sched::make_schedule(cfg_.scheduler_kind, entries, sa, free_at);
  std::vector<QueuedTask> reordered;
  reordered.reserve(waiting_.size());
  for (const std::size_t idx : order) reordered.push_back(waiting_[idx]);
  waiting_ = std::move(reordered);
}

double Environment::run_processor(double slot_start) {
  const double slot_end = slot_start + cfg_.limits.slot_seconds;
  double t = slot_start;
  double accrued = 0.0;
  while (t < slot_end) {
    if (!running_) {
      if (waiting_.empty()) break;
      QueuedTask next = waiting_.front();
      waiting_.erase(waiting_.begin());
      ledger_.scheduling_delays.push_back(t - next.entry.enqueue_time);
      running_ = RunningTask{next, next.entry.processing_time};
    }
    const double span = std::min(running_->remaining, slot_end - t);
    accrued += span * static_cast<double>(waiting_.size());
    running_->remaining -= span;
    t += span;
    if (running_->remaining <= 0.0) {
      running_.reset();
      ++ledger_.tasks_completed;
    }
  }
  return accrued;
}

StepResult Environment::step(const ActionTuple& action) {
  if (!started_) throw std::logic_error("step: reset() has not been called");
  if (done()) throw std::logic_error("step: episode already finished");

  const auto& lim = cfg_.limits;
  const double tau = lim.slot_seconds;
  const double now = state_.clock * tau;
  SlotRecord rec;
  rec.clock = state_.clock;

  // 1. movement
  const env::MoveResult mv = env::move_uav(state_.uav_pose, action.theta, action.dist, lim);
  rec.penalized = !mv.inside;
  env::Position3 pose = mv.pose;
  pose.x = std::clamp(pose.x, 0.0, lim.x_max);
  pose.y = std::clamp(pose.y, 0.0, lim.y_max);
  state_.uav_pose = pose;
  rec.pose = pose;
  rec.flight_energy = env::flight_energy_step(action.dist / tau, cfg_.propulsion, tau);

  // 2. uploads, nearest device first
  std::vector<int> uploading;
  if (action.accept > 0.5) {
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (pending_[i] && env::in_coverage(pose, devices_[i].position, lim)) uploading.push_back(static_cast<int>(i));
    }
    std::stable_sort(uploading.begin(), uploading.end(), [&](int a, int b) {
      return env::horizontal_distance(pose, devices_[static_cast<std::size_t>(a)].position) <
             env::horizontal_distance(pose, devices_[static_cast<std::size_t>(b)].position);
    });
  }
  for (const int gd : uploading) {
    const auto i = static_cast<std::size_t>(gd);
    const PendingTask p = *pending_[i];
    const double rate = env::uplink_rate(env::sinr(gd, uploading, devices_, pose, cfg_.channel), cfg_.channel);
    const double d_up = env::g2a_delay(p.task, rate);
    const double d_cpu = env::compute_delay(p.task, cfg_.compute);
    rec.upload_delay += d_up + d_cpu;
    rec.compute_energy += env::compute_energy(p.task, cfg_.compute);
    rec.receive_energy += env::receive_energy(p.task, rate, cfg_.compute);
    rec.accepted_tasks.push_back(p.id);
    rec.accepted_gds.push_back(gd);
    // 3. enqueue at the slot start
    waiting_.push_back({p.id, {p.task, now, d_cpu}});
    pending_[i].reset();
    ++ledger_.tasks_uploaded;
  }
  if (!uploading.empty()) reschedule();

  // 4. serial execution for one slot
  rec.queue_delay = run_processor(now);

  // 6. devices still holding a task wait one more slot
  const auto still_pending = std::count_if(pending_.begin(), pending_.end(), [](const auto& p) { return p.has_value(); });
  rec.wait_delay = tau * static_cast<double>(still_pending);

  // 5. reward
  VectorReward reward;
  if (rec.penalized) {
    reward = {-cfg_.reward.penalty_w, -cfg_.reward.penalty_w};
  } else if (cfg_.reward.mode == RewardMode::Slot) {
    reward = {-rec.upload_delay, -rec.slot_energy()};
  } else {
    reward = {-(rec.upload_delay + rec.wait_delay + rec.queue_delay), -(rec.slot_energy() + rec.flight_energy)};
  }

  ledger_.f1_running += rec.upload_delay + rec.wait_delay + rec.queue_delay;
  ledger_.f2_running += rec.slot_energy() + rec.flight_energy;
  ledger_.slots.push_back(std::move(rec));

  ++state_.clock;
  state_.invalid = !mv.inside;
  const bool finished = done();
  if (finished) {
    const double end = state_.clock * tau;
    for (const QueuedTask& q : waiting_) ledger_.unstarted_queue_wait += end - q.entry.enqueue_time;
  } else {
    generate_tasks();
  }
  refresh_state();
  return {state_, reward, finished};
}

std::vector<double> Environment::encode(const EnvState& s) const {
  const auto& lim = cfg_.limits;
  std::vector<double> obs;
  obs.reserve(observation_dim());
  obs.push_back(s.uav_pose.x / lim.x_max);
  obs.push_back(s.uav_pose.y / lim.y_max);
  obs.push_back(static_cast<double>(s.queue_len) / cfg_.n_gds);
  obs.push_back(static_cast<double>(s.clock) / cfg_.horizon);
  const double t_scale = cfg_.horizon * lim.slot_seconds;
  for (const GdStatus& g : s.gd_status) {
    obs.push_back(g.arrival_time_s / t_scale);
    obs.push_back(g.data_bits / cfg_.task_gen.max_bits);
  }
  return obs;
}

bool Environment::pending_in_range(const env::Position3& pose) const {
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    if (pending_[i] && env::in_coverage(pose, devices_[i].position, cfg_.limits)) return true;
  }
  return false;
}

RolloutResult rollout(const ActionSource& policy, const EnvConfig& cfg, std::uint64_t seed) {
  Environment env(cfg);
  RolloutResult out;
  EnvState s = env.reset(seed);
  out.transitions.reserve(static_cast<std::size_t>(cfg.horizon));
  while (!env.done()) {
    const ActionTuple a = policy(s, env);
    StepResult r = env.step(a);
    out.transitions.push_back({s, a, r.reward, r.next, r.done});
    s = std::move(r.next);
  }
  out.ledger = env.ledger();
  return out;
}

}  // namespace emot::momdp
