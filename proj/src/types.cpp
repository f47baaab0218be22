#include "uavrsma/types.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace uavrsma {

double distance(const Geometry& geo, const NetworkConfig& cfg, int slot, NodeId node) {
  if (slot < 0 || slot >= static_cast<int>(geo.trajectory.size()))
    throw std::out_of_range("distance: slot out of range");
  const auto& positions = node.kind == NodeKind::User ? geo.user_positions : geo.eve_positions;
  if (node.index < 0 || node.index >= static_cast<int>(positions.size()))
    throw std::out_of_range("distance: node index out of range");
  if (cfg.uav_altitude <= 0.0) throw std::invalid_argument("distance: altitude must be positive");
  const Vec2 d = geo.trajectory[static_cast<size_t>(slot)] - positions[static_cast<size_t>(node.index)];
  return std::sqrt(d.squaredNorm() + cfg.uav_altitude * cfg.uav_altitude);
}

std::vector<std::string> validate_config(const NetworkConfig& cfg, const QoEParams& qoe,
                                         const ChannelParams& ch) {
  std::vector<std::string> report;
  if (cfg.num_users < 1) report.push_back("num_users must be >= 1");
  if (cfg.num_eves < 1) report.push_back("num_eves must be >= 1");
  if (cfg.num_antennas < 1) report.push_back("num_antennas must be >= 1");
  if (cfg.num_slots < 2) report.push_back("num_slots must be >= 2");
  if (cfg.slot_seconds <= 0.0) report.push_back("slot_seconds must be positive");
  if (cfg.p_max_watt <= 0.0) report.push_back("p_max_watt must be positive");
  if (cfg.eta < 0.0) report.push_back("eta must be nonnegative");
  if (cfg.conv_eps <= 0.0) report.push_back("conv_eps must be positive");
  if (cfg.uav_altitude <= 0.0) report.push_back("uav_altitude must be positive");
  if (cfg.uav_speed < 0.0) report.push_back("uav_speed must be nonnegative");
  if (cfg.max_outer_iters < 1) report.push_back("max_outer_iters must be >= 1");
  if (cfg.max_inner_iters < 1) report.push_back("max_inner_iters must be >= 1");
  if (cfg.num_slots >= 2 && cfg.slot_seconds > 0.0 &&
      (cfg.q_start - cfg.q_final).norm() > (cfg.num_slots - 1) * cfg.step_bound() + 1e-9)
    report.push_back("unreachable endpoint: ||q0 - qF|| exceeds (T-1)*D");

  if (qoe.lambda1 <= 0.0) report.push_back("lambda1 must be positive");
  if (qoe.content_bits <= 0.0) report.push_back("content_bits must be positive");
  if (qoe.bandwidth_hz <= 0.0) report.push_back("bandwidth_hz must be positive");

  if (ch.alpha <= 2.0) report.push_back("alpha must exceed 2");
  if (ch.rician < 0.0) report.push_back("rician factor must be nonnegative");
  if (ch.noise_power <= 0.0) report.push_back("noise_power must be positive");
  if (ch.csi_eps < 0.0) report.push_back("csi_eps must be nonnegative");
  if (ch.pl_los <= 0.0 || ch.pl_nlos <= 0.0) report.push_back("path-loss factors must be positive");
  if (ch.carrier_wavelength <= 0.0) report.push_back("carrier_wavelength must be positive");
  return report;
}

std::vector<Vec2> straight_line_trajectory(const NetworkConfig& cfg) {
  std::vector<Vec2> q(static_cast<size_t>(cfg.num_slots));
  for (int t = 0; t < cfg.num_slots; ++t) {
    const double frac = cfg.num_slots > 1 ? static_cast<double>(t) / (cfg.num_slots - 1) : 0.0;
    q[static_cast<size_t>(t)] = cfg.q_start + frac * (cfg.q_final - cfg.q_start);
  }
  return q;
}

Geometry sample_geometry(const NetworkConfig& cfg, double square_side, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-square_side / 2.0, square_side / 2.0);
  Geometry geo;
  geo.user_positions.resize(static_cast<size_t>(cfg.num_users));
  geo.eve_positions.resize(static_cast<size_t>(cfg.num_eves));
  for (auto& p : geo.user_positions) {
    p.x() = coord(rng);
    p.y() = coord(rng);
  }
  for (auto& p : geo.eve_positions) {
    p.x() = coord(rng);
    p.y() = coord(rng);
  }
  geo.trajectory = straight_line_trajectory(cfg);
  return geo;
}

}  // namespace uavrsma
