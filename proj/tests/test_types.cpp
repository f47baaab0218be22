#include <doctest.h>

#include "uavrsma/types.hpp"

using namespace uavrsma;

TEST_CASE("distance basics") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 1;
  cfg.num_slots = 2;
  Geometry geo;
  geo.user_positions = {Vec2(0, 0)};
  geo.eve_positions = {Vec2(30, 40)};
  geo.trajectory = {Vec2(0, 0), Vec2(10, 0)};

  CHECK(distance(geo, cfg, 0, {NodeKind::User, 0}) == doctest::Approx(100.0));
  CHECK(distance(geo, cfg, 0, {NodeKind::Eve, 0}) == doctest::Approx(111.8034).epsilon(1e-6));
  CHECK(distance(geo, cfg, 1, {NodeKind::User, 0}) >= cfg.uav_altitude);
  CHECK_THROWS_AS(distance(geo, cfg, 5, {NodeKind::User, 0}), std::out_of_range);
  CHECK_THROWS_AS(distance(geo, cfg, 0, {NodeKind::User, 3}), std::out_of_range);
}

TEST_CASE("distance translation invariance") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 0;
  cfg.num_slots = 1;
  Geometry geo;
  geo.user_positions = {Vec2(12, -7)};
  geo.eve_positions = {};
  geo.trajectory = {Vec2(3, 4)};
  const double d0 = distance(geo, cfg, 0, {NodeKind::User, 0});
  const Vec2 shift(55.5, -91.25);
  geo.user_positions[0] += shift;
  geo.trajectory[0] += shift;
  CHECK(distance(geo, cfg, 0, {NodeKind::User, 0}) == doctest::Approx(d0).epsilon(1e-12));
}

TEST_CASE("validate_config default scenario is clean") {
  NetworkConfig cfg;
  QoEParams qoe;
  ChannelParams ch;
  CHECK(validate_config(cfg, qoe, ch).empty());
}

TEST_CASE("validate_config zero-travel scenario") {
  NetworkConfig cfg;
  cfg.q_start = Vec2(0, 0);
  cfg.q_final = Vec2(0, 0);
  cfg.num_slots = 2;
  QoEParams qoe;
  ChannelParams ch;
  CHECK(validate_config(cfg, qoe, ch).empty());
}

TEST_CASE("validate_config flags unreachable endpoint") {
  NetworkConfig cfg;
  cfg.num_slots = 3;
  cfg.q_start = Vec2(0, 0);
  cfg.q_final = Vec2(10 * cfg.step_bound(), 0);
  QoEParams qoe;
  ChannelParams ch;
  const auto report = validate_config(cfg, qoe, ch);
  bool found = false;
  for (const auto& line : report)
    if (line.find("unreachable endpoint") != std::string::npos) found = true;
  CHECK(found);
  // idempotent and pure
  CHECK(validate_config(cfg, qoe, ch) == report);
}

TEST_CASE("straight line trajectory hits both endpoints within step bound") {
  NetworkConfig cfg;
  const auto traj = straight_line_trajectory(cfg);
  REQUIRE(static_cast<int>(traj.size()) == cfg.num_slots);
  CHECK((traj.front() - cfg.q_start).norm() == doctest::Approx(0.0));
  CHECK((traj.back() - cfg.q_final).norm() <= cfg.step_bound() + 1e-9);
  for (size_t t = 1; t < traj.size(); ++t)
    CHECK((traj[t] - traj[t - 1]).norm() <= cfg.step_bound() + 1e-9);
}

TEST_CASE("sample_geometry is deterministic and in range") {
  NetworkConfig cfg;
  const auto g1 = sample_geometry(cfg, 500.0, 7);
  const auto g2 = sample_geometry(cfg, 500.0, 7);
  REQUIRE(g1.user_positions.size() == static_cast<size_t>(cfg.num_users));
  REQUIRE(g1.eve_positions.size() == static_cast<size_t>(cfg.num_eves));
  for (size_t i = 0; i < g1.user_positions.size(); ++i) {
    CHECK(g1.user_positions[i] == g2.user_positions[i]);
    CHECK(std::abs(g1.user_positions[i].x()) <= 250.0);
    CHECK(std::abs(g1.user_positions[i].y()) <= 250.0);
  }
  const auto g3 = sample_geometry(cfg, 500.0, 8);
  CHECK(g1.user_positions[0] != g3.user_positions[0]);
}
