#include <doctest.h>

#include <cmath>
#include <random>

#include "uavrsma/bf_subproblem.hpp"
#include "uavrsma/solver.hpp"
#include "uavrsma/traj_subproblem.hpp"

using namespace uavrsma;
using conic::ConicProgram;
using conic::LinExpr;
using conic::SolveStatus;

namespace {

// maximize/minimize one variable subject to the blocks already in prog
double optimize_var(ConicProgram& prog, int var, double sign) {
  prog.add_objective(var, sign);
  const auto sol = conic::solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  return sol.x[var];
}

void pin(ConicProgram& prog, int var, double value) {
  prog.add_zero(LinExpr::var(var) - LinExpr(value));
}

Geometry line_geometry(const NetworkConfig& cfg, std::vector<Vec2> users, std::vector<Vec2> eves) {
  Geometry geo;
  geo.user_positions = std::move(users);
  geo.eve_positions = std::move(eves);
  geo.trajectory = straight_line_trajectory(cfg);
  return geo;
}

std::vector<Beamformers> per_slot_matched_filters(const ChannelRealization& ch,
                                                  const NetworkConfig& cfg) {
  std::vector<Beamformers> bf;
  for (int t = 0; t < cfg.num_slots; ++t) {
    std::vector<CVec> h;
    for (const auto& hu : ch.users) h.push_back(hu[t]);
    bf.push_back(matched_filter_init(h, cfg.p_max_watt));
  }
  return bf;
}

std::vector<RateAllocation> zero_ra(const NetworkConfig& cfg) {
  RateAllocation r;
  r.a.assign(cfg.num_users, 0.0);
  return std::vector<RateAllocation>(cfg.num_slots, r);
}

double closest_approach(const std::vector<Vec2>& traj, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : traj) best = std::min(best, (q - p).norm());
  return best;
}

}  // namespace

TEST_CASE("quadratic lower block is a tangent minorant of x^2") {
  ConicProgram prog;
  const int x = prog.add_vars(1);
  const LinExpr bound = quadratic_lower_block(x, 1.0);
  Eigen::VectorXd pt(1);
  pt[0] = 2.0;
  CHECK(bound.eval(pt) == doctest::Approx(3.0));  // 3 <= 4
  pt[0] = 1.0;
  CHECK(bound.eval(pt) == doctest::Approx(1.0));  // tangency
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double xp = unif(rng), xv = unif(rng);
    const double lo = 2.0 * xp * xv - xp * xp;
    CHECK(lo <= xv * xv + 1e-12);
  }
}

TEST_CASE("user gain tangent stays below the true negative power") {
  const double alpha = 3.5, e = 4.0 / alpha;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(1e-5, 1e-2);
  for (int i = 0; i < 10000; ++i) {
    const double a_tau = unif(rng), a = unif(rng);
    const double tangent =
        std::pow(a_tau, -e) - e * std::pow(a_tau, -e - 1.0) * (a - a_tau);
    CHECK(tangent <= std::pow(a, -e) * (1.0 + 1e-12));
  }
}

TEST_CASE("distance gain user block is tight at the expansion point") {
  const double alpha = 3.5, z = 100.0, rho = 100.0;
  const Vec2 q_tau(30.0, -20.0), p(10.0, 5.0);
  const double d_tau = std::sqrt((q_tau - p).squaredNorm() + z * z);
  const double a_tau = std::pow(d_tau, -alpha / 2.0);

  SUBCASE("q fixed at expansion point recovers a = d^{-alpha/2}") {
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int ahat = prog.add_vars(1);
    pin(prog, q, q_tau.x() / rho);
    pin(prog, q + 1, q_tau.y() / rho);
    distance_gain_user_block(prog, q, q + 1, q_tau, p, ahat, a_tau, alpha, z, rho);
    const double best = optimize_var(prog, ahat, 1.0);
    CHECK(best == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("moved position still respects the true gain bound") {
    const Vec2 q_new(20.0, 0.0);
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int ahat = prog.add_vars(1);
    pin(prog, q, q_new.x() / rho);
    pin(prog, q + 1, q_new.y() / rho);
    distance_gain_user_block(prog, q, q + 1, q_tau, p, ahat, a_tau, alpha, z, rho);
    const double best = optimize_var(prog, ahat, 1.0);
    const double d_new = std::sqrt((q_new - p).squaredNorm() + z * z);
    CHECK(best * a_tau <= std::pow(d_new, -alpha / 2.0) * (1.0 + 1e-8));
  }

  SUBCASE("nonpositive expansion value throws") {
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int ahat = prog.add_vars(1);
    CHECK_THROWS_AS(distance_gain_user_block(prog, q, q + 1, q_tau, p, ahat, 0.0, alpha, z, rho),
                    std::domain_error);
    CHECK_THROWS_AS(distance_gain_user_block(prog, q, q + 1, q_tau, p, ahat, a_tau, 1.5, z, rho),
                    std::domain_error);
  }
}

TEST_CASE("distance gain eve block is tight at the expansion point") {
  const double alpha = 3.5, z = 100.0, rho = 100.0;
  const Vec2 q_tau(-40.0, 25.0), p(0.0, 60.0);
  const double d_tau = std::sqrt((q_tau - p).squaredNorm() + z * z);
  const double b_tau = std::pow(d_tau, -alpha / 2.0);

  SUBCASE("q fixed at expansion point recovers b = d^{-alpha/2}") {
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int bhat = prog.add_vars(1);
    pin(prog, q, q_tau.x() / rho);
    pin(prog, q + 1, q_tau.y() / rho);
    distance_gain_eve_block(prog, q, q + 1, q_tau, p, bhat, b_tau, alpha, z, rho);
    const double best = optimize_var(prog, bhat, -1.0);
    CHECK(best == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("moved position keeps b above the true gain") {
    const Vec2 q_new(-25.0, 40.0);
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int bhat = prog.add_vars(1);
    pin(prog, q, q_new.x() / rho);
    pin(prog, q + 1, q_new.y() / rho);
    distance_gain_eve_block(prog, q, q + 1, q_tau, p, bhat, b_tau, alpha, z, rho);
    const double best = optimize_var(prog, bhat, -1.0);
    const double d_new = std::sqrt((q_new - p).squaredNorm() + z * z);
    CHECK(best * b_tau >= std::pow(d_new, -alpha / 2.0) * (1.0 - 1e-8));
  }

  SUBCASE("affine minorant of the squared distance holds everywhere") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-300.0, 300.0);
    for (int i = 0; i < 10000; ++i) {
      const Vec2 qa(unif(rng), unif(rng)), qb(unif(rng), unif(rng)), pe(unif(rng), unif(rng));
      const double exact = (qb - pe).squaredNorm() + z * z;
      const double minorant =
          (qa - pe).squaredNorm() + z * z + 2.0 * (qa - pe).dot(qb - qa);
      CHECK(minorant <= exact + 1e-9);
    }
  }

  SUBCASE("bad arguments throw") {
    ConicProgram prog;
    const int q = prog.add_vars(2);
    const int bhat = prog.add_vars(1);
    CHECK_THROWS_AS(distance_gain_eve_block(prog, q, q + 1, q_tau, p, bhat, -1.0, alpha, z, rho),
                    std::domain_error);
  }
}

TEST_CASE("rtilde surrogate is a tangent minorant") {
  CHECK(rtilde_exact(3.0, 1.0, 3.0, 1.0) == doctest::Approx(0.0));
  CHECK(rtilde_surrogate(3.0, 1.0, 3.0, 1.0, 1.0, 3.0) == doctest::Approx(0.0));

  SUBCASE("tangency at the expansion point") {
    const double rll = 8.0, rlj = 2.0, rkk = 5.0, rkj = 1.5;
    CHECK(rtilde_surrogate(rll, rlj, rkk, rkj, rlj, rkk) ==
          doctest::Approx(rtilde_exact(rll, rlj, rkk, rkj)));
  }

  SUBCASE("eavesdropper terms cancel when total equals interference") {
    const double rkk = 4.0;
    const double with = rtilde_surrogate(6.0, 1.0, rkk, rkk, 1.0, rkk);
    const double without = std::log2(7.0) - std::log2(2.0);
    CHECK(with == doctest::Approx(without));
  }

  SUBCASE("minorant over random slacks") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 50.0);
    for (int i = 0; i < 10000; ++i) {
      const double rll = unif(rng), rlj = unif(rng), rkk = unif(rng), rkj = unif(rng);
      const double rlj_tau = unif(rng), rkk_tau = unif(rng);
      CHECK(rtilde_surrogate(rll, rlj, rkk, rkj, rlj_tau, rkk_tau) <=
            rtilde_exact(rll, rlj, rkk, rkj) + 1e-9);
    }
  }

  CHECK_THROWS_AS(rtilde_surrogate(1.0, 1.0, 1.0, 1.0, -0.5, 1.0), std::domain_error);
}

TEST_CASE("kinematics block pins the start and bounds every step") {
  NetworkConfig cfg;
  cfg.num_slots = 6;
  cfg.q_start = Vec2(-40.0, 0.0);
  cfg.q_final = Vec2(40.0, 0.0);
  const double rho = 100.0;
  ConicProgram prog;
  const int q = prog.add_vars(2 * cfg.num_slots);
  kinematics_block(prog, q, cfg, rho);
  prog.add_objective(q + 2 * (cfg.num_slots - 1), 1.0);  // push the tail east
  const auto sol = conic::solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  std::vector<Vec2> traj;
  for (int t = 0; t < cfg.num_slots; ++t)
    traj.emplace_back(sol.x[q + 2 * t] * rho, sol.x[q + 2 * t + 1] * rho);
  CHECK((traj[0] - cfg.q_start).norm() <= 1e-6);
  const double d_max = cfg.step_bound();
  for (int t = 0; t + 1 < cfg.num_slots; ++t)
    CHECK((traj[t + 1] - traj[t]).norm() <= d_max * (1.0 + 1e-6));
  CHECK((traj.back() - cfg.q_final).norm() <= d_max * (1.0 + 1e-6));
  // pushing east with 5 moves of 20 m from x=-40 lands at 40+20
  CHECK(traj.back().x() == doctest::Approx(60.0).epsilon(1e-4));
}

TEST_CASE("check_kinematics names the violated constraint") {
  NetworkConfig cfg;
  cfg.num_slots = 3;
  cfg.q_start = Vec2(0.0, 0.0);
  cfg.q_final = Vec2(40.0, 0.0);
  std::vector<Vec2> ok{{0.0, 0.0}, {20.0, 0.0}, {40.0, 0.0}};
  CHECK(check_kinematics(ok, cfg).empty());

  std::vector<Vec2> bad_start{{5.0, 0.0}, {20.0, 0.0}, {40.0, 0.0}};
  CHECK(check_kinematics(bad_start, cfg).find("q_start") != std::string::npos);

  std::vector<Vec2> bad_step{{0.0, 0.0}, {30.0, 0.0}, {40.0, 0.0}};
  CHECK(check_kinematics(bad_step, cfg).find("step") != std::string::npos);

  std::vector<Vec2> bad_tail{{0.0, 0.0}, {-10.0, 0.0}, {-20.0, 0.0}};
  CHECK(check_kinematics(bad_tail, cfg).find("q_final") != std::string::npos);
}

TEST_CASE("solve_traj rejects an infeasible initial trajectory") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 0;
  cfg.num_antennas = 2;
  cfg.num_slots = 3;
  cfg.q_start = Vec2(-20.0, 0.0);
  cfg.q_final = Vec2(20.0, 0.0);
  Geometry geo = line_geometry(cfg, {Vec2(0.0, 30.0)}, {});
  geo.trajectory[1] = Vec2(100.0, 0.0);  // 120 m jump
  const ChannelParams params;
  const QoEParams qoe;
  ChannelRealization ch = sample_channel(params, geo, cfg, 3);
  const auto bf = per_slot_matched_filters(ch, cfg);
  CHECK_THROWS_WITH_AS(solve_traj(params, geo, cfg, qoe, 3, bf, zero_ra(cfg)),
                       doctest::Contains("step"), std::runtime_error);
}

TEST_CASE("fully constrained two-slot trajectory is returned unchanged") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 1;
  cfg.num_antennas = 2;
  cfg.num_slots = 2;
  cfg.q_start = Vec2(-20.0, 0.0);
  cfg.q_final = Vec2(20.0, 0.0);  // exactly 2 D apart: q[1] is forced
  Geometry geo = line_geometry(cfg, {Vec2(0.0, 40.0)}, {Vec2(0.0, -150.0)});
  geo.trajectory = {cfg.q_start, Vec2(0.0, 0.0)};  // midpoint is the only feasible slot 1
  const ChannelParams params;
  const QoEParams qoe;
  ChannelRealization ch = sample_channel(params, geo, cfg, 5);
  const auto bf = per_slot_matched_filters(ch, cfg);
  const TrajResult res = solve_traj(params, geo, cfg, qoe, 5, bf, zero_ra(cfg));
  REQUIRE(res.trajectory.size() == 2);
  CHECK((res.trajectory[0] - geo.trajectory[0]).norm() <= 1e-9);
  CHECK((res.trajectory[1] - geo.trajectory[1]).norm() <= 0.1);
}

TEST_CASE("single user pulls the trajectory closer with slack to spare") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 0;
  cfg.num_antennas = 4;
  cfg.num_slots = 21;
  cfg.q_start = Vec2(-100.0, 0.0);
  cfg.q_final = Vec2(100.0, 0.0);
  Geometry geo = line_geometry(cfg, {Vec2(0.0, 60.0)}, {});
  const ChannelParams params;
  const QoEParams qoe;
  ChannelRealization ch = sample_channel(params, geo, cfg, 21);
  const auto bf = per_slot_matched_filters(ch, cfg);
  const auto ra = zero_ra(cfg);
  const double init_mos = evaluate_all(ch, bf, ra, cfg, params, qoe, true).sum_mos;

  const TrajResult res = solve_traj(params, geo, cfg, qoe, 21, bf, ra);
  CHECK(check_kinematics(res.trajectory, cfg).empty());
  CHECK(res.sum_mos >= init_mos - 1e-6);
  for (const auto& w : res.warnings) CHECK(w.find("minorant") == std::string::npos);
  const Vec2 user = geo.user_positions[0];
  CHECK(closest_approach(res.trajectory, user) <=
        closest_approach(geo.trajectory, user) + 1e-9);
  // slacks are exactly the induced gains, hence positive and consistent
  for (int t = 0; t < cfg.num_slots; ++t) {
    const double d = std::sqrt((res.trajectory[t] - user).squaredNorm() +
                               cfg.uav_altitude * cfg.uav_altitude);
    CHECK(res.slacks.a[0][t] ==
          doctest::Approx(std::pow(d, -params.alpha / 2.0)).epsilon(1e-4));
    CHECK(res.slacks.a[0][t] > 0.0);
  }
}

TEST_CASE("free hover settles closer to the user than to the eavesdropper") {
  NetworkConfig cfg;
  cfg.num_users = 1;
  cfg.num_eves = 1;
  cfg.num_antennas = 4;
  cfg.num_slots = 6;
  cfg.uav_speed = 500.0;  // effectively unconstrained movement
  cfg.q_start = Vec2(0.0, 0.0);
  cfg.q_final = Vec2(0.0, 0.0);
  Geometry geo = line_geometry(cfg, {Vec2(150.0, 0.0)}, {Vec2(-200.0, 0.0)});
  const ChannelParams params;
  const QoEParams qoe;
  ChannelRealization ch = sample_channel(params, geo, cfg, 8);
  const auto bf = per_slot_matched_filters(ch, cfg);
  TrajOptions opts;
  opts.max_inner_iters = 8;
  const TrajResult res = solve_traj(params, geo, cfg, qoe, 8, bf, zero_ra(cfg), opts);
  CHECK(check_kinematics(res.trajectory, cfg).empty());
  // middle slots are free to hover; compare distances there
  const Vec2 mid = res.trajectory[cfg.num_slots / 2];
  CHECK((mid - geo.user_positions[0]).norm() < (mid - geo.eve_positions[0]).norm());
  // eavesdropper slack respects the altitude cap
  for (int t = 0; t < cfg.num_slots; ++t)
    CHECK(res.slacks.b[0][t] <= std::pow(cfg.uav_altitude, -params.alpha / 2.0) + 1e-12);
}

TEST_CASE("true sum MOS never regresses across a multi-user instance") {
  NetworkConfig cfg;
  cfg.num_users = 2;
  cfg.num_eves = 1;
  cfg.num_antennas = 4;
  cfg.num_slots = 8;
  cfg.q_start = Vec2(-70.0, 0.0);
  cfg.q_final = Vec2(70.0, 0.0);
  const ChannelParams params;
  const QoEParams qoe;
  for (unsigned long seed : {31UL, 32UL, 33UL}) {
    Geometry geo = sample_geometry(cfg, 300.0, seed);
    ChannelRealization ch = sample_channel(params, geo, cfg, seed + 100);
    const auto bf = per_slot_matched_filters(ch, cfg);
    const auto ra = zero_ra(cfg);
    const double init_mos = evaluate_all(ch, bf, ra, cfg, params, qoe, true).sum_mos;
    const TrajResult res = solve_traj(params, geo, cfg, qoe, seed + 100, bf, ra);
    CHECK(check_kinematics(res.trajectory, cfg).empty());
    CHECK(res.sum_mos >= init_mos - 1e-6);
    for (const auto& w : res.warnings) CHECK(w.find("minorant") == std::string::npos);
  }
}
