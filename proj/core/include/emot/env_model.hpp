#pragma once

// Physical, channel and energy model of a single UAV serving ground devices.
// Every function here is pure; parameters arrive through the config structs.

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace emot::env {

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct GroundDevice {
  int id = 0;
  Position3 position;  // z == 0
  double transmit_power_w = 0.1;
};

struct ComputeTask {
  int source_gd = 0;
  double data_bits = 0.0;       // O_i
  double cycles_per_bit = 0.0;  // mu_i
  double arrival_time_s = 0.0;  // lambda_i
};

/// Throws std::invalid_argument unless data_bits > 0, cycles_per_bit > 0 and
/// arrival_time_s >= 0.
void validate(const ComputeTask& task);

struct ChannelParams {
  double a_env = 9.61;
  double b_env = 0.16;
  double carrier_hz = 2e9;
  double light_speed = 3e8;
  double loss_los_db = 0.1;
  double loss_nlos_db = 21.0;
  double bandwidth_hz = 10e6;
  double noise_power_w = 1e-13;
};

struct PropulsionParams {
  double p1_w = 79.8563;   // blade profile power
  double p2_w = 88.6279;   // induced power in hover
  double v_tip = 120.0;
  double v_induced = 4.03;
  double d0 = 0.6;         // fuselage drag ratio
  double rho = 1.225;
  double solidity = 0.05;
  double disc_area = 0.503;
};

struct ComputeParams {
  double kappa = 1e-28;
  double cpu_hz = 3e9;
  double rx_power_w = 0.1;
};

struct UavLimits {
  double altitude_m = 100.0;
  double v_max = 30.0;
  double theta_max = std::numbers::pi / 4.0;
  double slot_seconds = 1.0;
  double x_max = 1000.0;
  double y_max = 1000.0;

  [[nodiscard]] double d_max() const { return v_max * slot_seconds; }
  [[nodiscard]] double coverage_radius() const;
  [[nodiscard]] bool inside(const Position3& p) const {
    return p.x >= 0.0 && p.x <= x_max && p.y >= 0.0 && p.y <= y_max;
  }
};

void validate(const ChannelParams& ch);
void validate(const PropulsionParams& pp);
void validate(const ComputeParams& cp);
void validate(const UavLimits& limits);

double horizontal_distance(const Position3& uav, const Position3& gd);

/// Straight-line UAV to device distance, sqrt(dz^2 + d_h^2).
double link_distance(const Position3& uav, const Position3& gd);

/// True iff the horizontal distance does not exceed H * tan(theta_max).
bool in_coverage(const Position3& uav, const Position3& gd, const UavLimits& limits);

/// Elevation angle in degrees, atan(H / d_h). 90 when directly overhead.
double elevation_angle_deg(const Position3& uav, const Position3& gd);

/// Logistic LoS probability of an elevation angle given in degrees.
double los_probability_at_angle(double elevation_deg, const ChannelParams& ch);
double los_probability(const Position3& uav, const Position3& gd, const ChannelParams& ch);

/// Mean path loss in dB for a given link distance and LoS probability.
double path_loss_db(double link_distance_m, double los_prob, const ChannelParams& ch);
double path_loss_db(const Position3& uav, const Position3& gd, const ChannelParams& ch);

/// Transmit power attenuated by a path loss in dB.
double received_power_w(double transmit_power_w, double loss_db);

/// SINR of `target` among simultaneously received powers. The other entries
/// interfere.
double sinr(std::span<const double> received_powers, std::size_t target, double noise_power_w);

/// SINR at the UAV of `target_gd` when every device listed in `transmitting`
/// uploads in the same slot. Throws std::invalid_argument when the target is
/// not transmitting.
double sinr(int target_gd, std::span<const int> transmitting, std::span<const GroundDevice> devices,
            const Position3& uav, const ChannelParams& ch);

double uplink_rate(double sinr_value, const ChannelParams& ch);

/// O / R. Throws std::domain_error for a non-positive rate.
double g2a_delay(const ComputeTask& task, double rate_bps);
double compute_delay(const ComputeTask& task, const ComputeParams& cp);
double compute_energy(const ComputeTask& task, const ComputeParams& cp);
/// P_RX * O / R. Throws std::domain_error for a non-positive rate.
double receive_energy(const ComputeTask& task, double rate_bps, const ComputeParams& cp);

struct MoveResult {
  Position3 pose;
  bool inside = true;  // false when the unclamped pose left the mission area
};

/// Moves the UAV horizontally. Reports, but does not clamp, boundary exits.
MoveResult move_uav(const Position3& pose, double theta, double dist, const UavLimits& limits);

double propulsion_power(double speed, const PropulsionParams& pp);
double flight_energy_step(double speed, const PropulsionParams& pp, double tau);

}  // namespace emot::env
