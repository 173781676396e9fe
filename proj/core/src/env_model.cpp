#include "emot/env_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emot::env {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const ComputeTask& task) {
  require(task.data_bits > 0.0, "ComputeTask: data_bits must be > 0");
  require(task.cycles_per_bit > 0.0, "ComputeTask: cycles_per_bit must be > 0");
  require(task.arrival_time_s >= 0.0, "ComputeTask: arrival_time must be >= 0");
}

void validate(const ChannelParams& ch) {
  require(ch.a_env > 0.0 && ch.b_env > 0.0, "ChannelParams: a_env and b_env must be > 0");
  require(ch.carrier_hz > 0.0 && ch.light_speed > 0.0, "ChannelParams: carrier and light speed must be > 0");
  require(ch.loss_los_db >= 0.0 && ch.loss_nlos_db >= 0.0, "ChannelParams: losses must be >= 0");
  require(ch.bandwidth_hz > 0.0, "ChannelParams: bandwidth must be > 0");
  require(ch.noise_power_w > 0.0, "ChannelParams: noise power must be > 0");
}

void validate(const PropulsionParams& pp) {
  require(pp.p1_w > 0.0 && pp.p2_w > 0.0 && pp.v_tip > 0.0 && pp.v_induced > 0.0 && pp.d0 > 0.0 &&
              pp.rho > 0.0 && pp.solidity > 0.0 && pp.disc_area > 0.0,
          "PropulsionParams: all values must be > 0");
}

void validate(const ComputeParams& cp) {
  require(cp.kappa > 0.0 && cp.cpu_hz > 0.0 && cp.rx_power_w > 0.0, "ComputeParams: all values must be > 0");
}

void validate(const UavLimits& limits) {
  require(limits.altitude_m > 0.0, "UavLimits: altitude must be > 0");
  require(limits.v_max > 0.0, "UavLimits: v_max must be > 0");
  require(limits.theta_max > 0.0 && limits.theta_max < std::numbers::pi / 2.0,
          "UavLimits: theta_max must lie in (0, pi/2)");
  require(limits.slot_seconds > 0.0, "UavLimits: slot_seconds must be > 0");
  require(limits.x_max > 0.0 && limits.y_max > 0.0, "UavLimits: area extents must be > 0");
}

double UavLimits::coverage_radius() const { return altitude_m * std::tan(theta_max); }

double horizontal_distance(const Position3& uav, const Position3& gd) {
  return std::hypot(uav.x - gd.x, uav.y - gd.y);
}

double link_distance(const Position3& uav, const Position3& gd) {
  return std::hypot(horizontal_distance(uav, gd), uav.z - gd.z);
}

bool in_coverage(const Position3& uav, const Position3& gd, const UavLimits& limits) {
  // H tan(pi/4) rounds to just below H; a relative slack keeps the boundary inclusive.
  return horizontal_distance(uav, gd) <= limits.coverage_radius() * (1.0 + 1e-12);
}

double elevation_angle_deg(const Position3& uav, const Position3& gd) {
  // atan2 gives 90 degrees for a coincident projection instead of dividing by zero.
  return std::atan2(uav.z - gd.z, horizontal_distance(uav, gd)) * 180.0 / std::numbers::pi;
}

double los_probability_at_angle(double elevation_deg, const ChannelParams& ch) {
  return 1.0 / (1.0 + ch.a_env * std::exp(-ch.b_env * (elevation_deg - ch.a_env)));
}

double los_probability(const Position3& uav, const Position3& gd, const ChannelParams& ch) {
  return los_probability_at_angle(elevation_angle_deg(uav, gd), ch);
}

double path_loss_db(double link_distance_m, double los_prob, const ChannelParams& ch) {
  return 20.0 * std::log10(link_distance_m) + los_prob * (ch.loss_los_db - ch.loss_nlos_db) +
         20.0 * std::log10(4.0 * std::numbers::pi * ch.carrier_hz / ch.light_speed) + ch.loss_nlos_db;
}

double path_loss_db(const Position3& uav, const Position3& gd, const ChannelParams& ch) {
  return path_loss_db(link_distance(uav, gd), los_probability(uav, gd, ch), ch);
}

double received_power_w(double transmit_power_w, double loss_db) {
  return transmit_power_w * std::pow(10.0, -loss_db / 10.0);
}

double sinr(std::span<const double> received_powers, std::size_t target, double noise_power_w) {
  if (target >= received_powers.size()) throw std::invalid_argument("sinr: target index out of range");
  double interference = 0.0;
  for (std::size_t j = 0; j < received_powers.size(); ++j) {
    if (j != target) interference += received_powers[j];
  }
  return received_powers[target] / (interference + noise_power_w);
}

double sinr(int target_gd, std::span<const int> transmitting, std::span<const GroundDevice> devices,
            const Position3& uav, const ChannelParams& ch) {
  std::vector<double> powers;
  powers.reserve(transmitting.size());
  std::size_t target = transmitting.size();
  for (std::size_t k = 0; k < transmitting.size(); ++k) {
    const int id = transmitting[k];
    const auto it = std::find_if(devices.begin(), devices.end(), [id](const GroundDevice& d) { return d.id == id; });
    if (it == devices.end()) throw std::invalid_argument("sinr: unknown device id " + std::to_string(id));
    powers.push_back(received_power_w(it->transmit_power_w, path_loss_db(uav, it->position, ch)));
    if (id == target_gd) target = k;
  }
  if (target == transmitting.size()) throw std::invalid_argument("sinr: target device is not transmitting");
  return sinr(powers, target, ch.noise_power_w);
}

double uplink_rate(double sinr_value, const ChannelParams& ch) {
  if (sinr_value < 0.0) throw std::invalid_argument("uplink_rate: sinr must be >= 0");
  return ch.bandwidth_hz * std::log2(1.0 + sinr_value);
}

double g2a_delay(const ComputeTask& task, double rate_bps) {
  validate(task);
  if (!(rate_bps > 0.0)) throw std::domain_error("g2a_delay: rate must be > 0");
  return task.data_bits / rate_bps;
}

double compute_delay(const ComputeTask& task, const ComputeParams& cp) {
  return task.data_bits * task.cycles_per_bit / cp.cpu_hz;
}

double compute_energy(const ComputeTask& task, const ComputeParams& cp) {
  return cp.kappa * task.data_bits * task.cycles_per_bit * cp.cpu_hz * cp.cpu_hz;
}

double receive_energy(const ComputeTask& task, double rate_bps, const ComputeParams& cp) {
  return cp.rx_power_w * g2a_delay(task, rate_bps);
}

MoveResult move_uav(const Position3& pose, double theta, double dist, const UavLimits& limits) {
  if (!(theta >= 0.0 && theta <= 2.0 * std::numbers::pi)) throw std::invalid_argument("move_uav: theta outside [0, 2pi]");
  // Tolerate round-off at the distance cap.
  if (!(dist >= 0.0 && dist <= limits.d_max() * (1.0 + 1e-12))) {
    throw std::invalid_argument("move_uav: dist outside [0, d_max]");
  }
  MoveResult out;
  out.pose = {pose.x + dist * std::cos(theta), pose.y + dist * std::sin(theta), pose.z};
  out.inside = limits.inside(out.pose);
  return out;
}

double propulsion_power(double speed, const PropulsionParams& pp) {
  if (speed < 0.0) throw std::invalid_argument("propulsion_power: speed must be >= 0");
  const double v2 = speed * speed;
  const double v0_2 = pp.v_induced * pp.v_induced;
  const double blade = pp.p1_w * (1.0 + 3.0 * v2 / (pp.v_tip * pp.v_tip));
  // sqrt(1 + x^2) - x with x = v^2 / (2 v0^2), rewritten as 1 / (sqrt(1 + x^2) + x)
  // to avoid cancellation at cruise speeds.
  const double x = v2 / (2.0 * v0_2);
  const double inner = 1.0 / (std::sqrt(1.0 + x * x) + x);
  const double induced = pp.p2_w * std::sqrt(inner);
  const double parasite = 0.5 * pp.d0 * pp.rho * pp.solidity * pp.disc_area * v2 * speed;
  return blade + induced + parasite;
}

double flight_energy_step(double speed, const PropulsionParams& pp, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("flight_energy_step: tau must be > 0");
  return propulsion_power(speed, pp) * tau;
}

}  // namespace emot::env
