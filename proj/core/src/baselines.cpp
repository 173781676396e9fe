#include "emot/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "emot/seeds.hpp"

namespace emot::baselines {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOnPathTol = 1e-6;  // metres

double heading(double dx, double dy) {
  double th = std::atan2(dy, dx);
  if (th < 0.0) th += kTwoPi;
  return std::clamp(th, 0.0, kTwoPi);
}

// Arc length of r = b * phi from 0 to phi.
double spiral_arc(double b, double phi) {
  return 0.5 * b * (phi * std::sqrt(1.0 + phi * phi) + std::asinh(phi));
}

// Parameter reached after walking `ds` further along the spiral from phi0.
double spiral_advance(double b, double phi0, double ds) {
  const double target = spiral_arc(b, phi0) + ds;
  double phi = std::max(phi0 + ds / (b * std::sqrt(1.0 + phi0 * phi0)), std::sqrt(2.0 * target / b));
  for (int it = 0; it < 50; ++it) {
    const double f = spiral_arc(b, phi) - target;
    const double df = b * std::sqrt(1.0 + phi * phi);
    const double step = f / df;
    phi -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, phi)) break;
  }
  return phi;
}

struct Move {
  double theta = 0.0;
  double dist = 0.0;
};

Move toward(const env::Position3& from, double tx, double ty, double d_max) {
  const double dx = tx - from.x;
  const double dy = ty - from.y;
  const double d = std::hypot(dx, dy);
  if (d == 0.0) return {0.0, 0.0};
  return {heading(dx, dy), std::min(d, d_max)};
}

// Uniform heading at full step, redrawn while the step would leave the area.
Move random_move(const env::Position3& p, const env::UavLimits& lim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int tries = 0; tries < 64; ++tries) {
    const Move mv{u(rng), lim.d_max()};
    if (env::move_uav(p, mv.theta, mv.dist, lim).inside) return mv;
  }
  return toward(p, 0.5 * lim.x_max, 0.5 * lim.y_max, lim.d_max());
}

Move circular_move(const BaselineConfig& cfg, const env::Position3& p, const env::UavLimits& lim) {
  const double cx = 0.5 * lim.x_max;
  const double cy = 0.5 * lim.y_max;
  const double r = cfg.circle_radius_fraction * std::min(lim.x_max, lim.y_max);
  const double rho = std::hypot(p.x - cx, p.y - cy);
  const double phi = rho > 0.0 ? std::atan2(p.y - cy, p.x - cx) : 0.0;
  if (std::abs(rho - r) > kOnPathTol) return toward(p, cx + r * std::cos(phi), cy + r * std::sin(phi), lim.d_max());
  const double chord = std::min(lim.d_max(), 2.0 * r);
  const double delta = 2.0 * std::asin(chord / (2.0 * r));
  return toward(p, cx + r * std::cos(phi + delta), cy + r * std::sin(phi + delta), lim.d_max());
}

Move spiral_move(const BaselineConfig& cfg, const momdp::EnvConfig& env, const env::Position3& p) {
  const env::UavLimits& lim = env.limits;
  const double cx = 0.5 * lim.x_max;
  const double cy = 0.5 * lim.y_max;
  const double r_max = cfg.spiral_max_radius_fraction * std::min(lim.x_max, lim.y_max);
  const double b = spiral_pitch(cfg, env);
  const double rho = std::hypot(p.x - cx, p.y - cy);
  const double phi = rho / b;
  const double angle = rho > kOnPathTol ? std::atan2(p.y - cy, p.x - cx) : 0.0;
  const double wrapped = std::remainder(angle - phi, kTwoPi);
  const bool on_spiral = rho <= kOnPathTol || std::abs(wrapped) * std::max(rho, 1.0) <= kOnPathTol * 10.0;
  const bool on_rim = std::abs(rho - r_max) <= kOnPathTol;
  if (on_rim) {
    const double chord = std::min(lim.d_max(), 2.0 * r_max);
    const double delta = 2.0 * std::asin(chord / (2.0 * r_max));
    return toward(p, cx + r_max * std::cos(angle + delta), cy + r_max * std::sin(angle + delta), lim.d_max());
  }
  if (!on_spiral) return toward(p, cx, cy, lim.d_max());
  const double phi_next = std::min(spiral_advance(b, phi, lim.d_max()), r_max / b);
  const double r_next = b * phi_next;
  return toward(p, cx + r_next * std::cos(phi_next), cy + r_next * std::sin(phi_next), lim.d_max());
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::RandomWalk: return "random_walk";
    case BaselineKind::Circular: return "circular";
    case BaselineKind::Spiral: return "spiral";
    case BaselineKind::Hover: return "hover";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random_walk" || name == "random") return BaselineKind::RandomWalk;
  if (name == "circular") return BaselineKind::Circular;
  if (name == "spiral") return BaselineKind::Spiral;
  if (name == "hover") return BaselineKind::Hover;
  throw std::invalid_argument("unknown baseline '" + std::string(name) +
                              "' (expected random_walk, circular, spiral or hover)");
}

void BaselineConfig::validate() const {
  if (!(circle_radius_fraction > 0.0 && circle_radius_fraction < 0.5)) {
    throw std::invalid_argument("BaselineConfig: circle_radius_fraction must be in (0, 0.5)");
  }
  if (!(spiral_max_radius_fraction > 0.0 && spiral_max_radius_fraction < 0.5)) {
    throw std::invalid_argument("BaselineConfig: spiral_max_radius_fraction must be in (0, 0.5)");
  }
}

double spiral_pitch(const BaselineConfig& cfg, const momdp::EnvConfig& env) {
  const double r_max = cfg.spiral_max_radius_fraction * std::min(env.limits.x_max, env.limits.y_max);
  return r_max * r_max / (2.0 * env.limits.d_max() * env.horizon);
}

momdp::ActionTuple baseline_action(const BaselineConfig& cfg, const momdp::EnvState& state,
                                   const momdp::Environment& env, std::mt19937_64& rng) {
  const momdp::EnvConfig& ec = env.config();
  const env::UavLimits& lim = ec.limits;
  Move mv;
  switch (cfg.kind) {
    case BaselineKind::RandomWalk: mv = random_move(state.uav_pose, lim, rng); break;
    case BaselineKind::Circular: mv = circular_move(cfg, state.uav_pose, lim); break;
    case BaselineKind::Spiral: mv = spiral_move(cfg, ec, state.uav_pose); break;
    case BaselineKind::Hover: break;
  }
  env::Position3 next = env::move_uav(state.uav_pose, mv.theta, mv.dist, lim).pose;
  next.x = std::clamp(next.x, 0.0, lim.x_max);
  next.y = std::clamp(next.y, 0.0, lim.y_max);
  const double accept = env.pending_in_range(next) ? 1.0 : 0.0;
  return momdp::decode_action({mv.theta, mv.dist, accept}, lim);
}

momdp::EnvConfig baseline_env(const momdp::EnvConfig& env) {
  momdp::EnvConfig out = env;
  out.scheduler_kind = sched::SchedulerKind::FCFS;
  return out;
}

momdp::RolloutResult baseline_rollout(const BaselineConfig& cfg, const momdp::EnvConfig& env, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(seed, "baseline"));
  return momdp::rollout(
      [&](const momdp::EnvState& s, const momdp::Environment& e) { return baseline_action(cfg, s, e, rng); },
      baseline_env(env), seed);
}

pareto::ObjectivePoint evaluate_baseline(const BaselineConfig& cfg, const momdp::EnvConfig& env,
                                         std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("evaluate_baseline: no seeds");
  pareto::ObjectivePoint mean;
  for (const std::uint64_t s : seeds) {
    const momdp::Objectives o = momdp::episode_objectives(baseline_rollout(cfg, env, s).ledger);
    mean.f1 += o.f1;
    mean.f2 += o.f2;
  }
  mean.f1 /= static_cast<double>(seeds.size());
  mean.f2 /= static_cast<double>(seeds.size());
  return mean;
}

}  // namespace emot::baselines
