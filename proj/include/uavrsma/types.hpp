#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace uavrsma {

using Vec2 = Eigen::Vector2d;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Scenario constants shared by every module. Immutable after construction.
struct NetworkConfig {
  int num_users = 4;        // L
  int num_eves = 2;         // K
  int num_antennas = 4;     // N
  int num_slots = 40;       // T
  double slot_seconds = 1.0;
  double p_max_watt = 1.0;          // 30 dBm
  double eta = 0.1;                 // secrecy threshold, bit/s/Hz
  double conv_eps = 1e-3;           // AO stopping tolerance on sum MOS
  int max_outer_iters = 50;
  int max_inner_iters = 8;
  double uav_speed = 20.0;          // m/s
  double uav_altitude = 100.0;      // m
  Vec2 q_start{-200.0, 0.0};
  Vec2 q_final{200.0, 0.0};

  // Per-slot displacement bound, constraint (8g).
  double step_bound() const { return uav_speed * slot_seconds; }
};

/// MOS utility constants.
struct QoEParams {
  double lambda1 = 1.12;
  double lambda2 = 4.675;
  double bandwidth_hz = 250e3;      // W_l
  double content_bits = 0.02e6;     // Omega
  double mos_floor = 1.0;           // reported when the secrecy rate is nonpositive
};

/// Propagation constants (linear scale).
struct ChannelParams {
  double alpha = 3.5;               // path-loss exponent
  double pl_los = 0.562341325190349;    // -2.5 dB
  double pl_nlos = 0.446683592150963;   // -3.5 dB
  double rician = 2.0;
  double noise_power = 9.95262314968883e-16;  // -174 dBm/Hz over 250 kHz
  double csi_eps = 1e-3;            // eavesdropper CSI error norm, fraction of ||h||
  double carrier_wavelength = 0.15; // m
  double shadowing_sigma_db = 8.0;
};

/// Node placements and the UAV trajectory.
struct Geometry {
  std::vector<Vec2> user_positions;
  std::vector<Vec2> eve_positions;
  std::vector<Vec2> trajectory;
};

enum class NodeKind { User, Eve };

struct NodeId {
  NodeKind kind;
  int index;
};

/// UAV-to-node distance at a slot. Always >= altitude.
double distance(const Geometry& geo, const NetworkConfig& cfg, int slot, NodeId node);

/// Returns the list of violated invariants; empty means valid. Pure.
std::vector<std::string> validate_config(const NetworkConfig& cfg, const QoEParams& qoe,
                                         const ChannelParams& ch);

/// Straight line from q_start to q_final in equal steps.
std::vector<Vec2> straight_line_trajectory(const NetworkConfig& cfg);

/// Seeded uniform placement of users and eavesdroppers in a centered square,
/// plus the straight-line initial trajectory.
Geometry sample_geometry(const NetworkConfig& cfg, double square_side, unsigned long seed);

}  // namespace uavrsma
