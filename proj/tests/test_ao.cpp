#include <doctest.h>

#include <cmath>
#include <sstream>

#include "uavrsma/ao.hpp"
#include "uavrsma/rates.hpp"
#include "uavrsma/traj_subproblem.hpp"

using namespace uavrsma;

namespace {

NetworkConfig small_config() {
  NetworkConfig cfg;
  cfg.num_users = 2;
  cfg.num_eves = 1;
  cfg.num_antennas = 2;
  cfg.num_slots = 6;
  cfg.uav_speed = 100.0;  // keep the short straight-line start feasible
  return cfg;
}

Geometry small_geometry(const NetworkConfig& cfg, unsigned long seed) {
  return sample_geometry(cfg, 300.0, seed);
}

// Bitwise equality of the objective trace (wall times are excluded: they are
// the only nondeterministic field).
bool same_history(const SolutionState& a, const SolutionState& b) {
  if (a.history.size() != b.history.size()) return false;
  for (size_t i = 0; i < a.history.size(); ++i) {
    const auto& x = a.history[i];
    const auto& y = b.history[i];
    if (x.outer_iter != y.outer_iter) return false;
    if (x.sum_mos_after_bf != y.sum_mos_after_bf) return false;
    if (x.sum_mos != y.sum_mos) return false;
    if (x.bf_inner_iters != y.bf_inner_iters) return false;
    if (x.traj_inner_iters != y.traj_inner_iters) return false;
    if (x.bf_kept_incumbent != y.bf_kept_incumbent) return false;
    if (x.traj_kept_incumbent != y.traj_kept_incumbent) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("huge tolerance stops after exactly one outer iteration") {
  NetworkConfig cfg = small_config();
  cfg.conv_eps = 1e6;
  const Geometry geo = small_geometry(cfg, 7);
  const SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 7);
  CHECK(st.history.size() == 1);
  CHECK(st.converged);
  CHECK(st.sum_mos == st.history.back().sum_mos);
}

TEST_CASE("small scenario converges with a monotone history") {
  const NetworkConfig cfg = small_config();
  const Geometry geo = small_geometry(cfg, 3);
  const SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 3);
  REQUIRE(!st.history.empty());
  CHECK(st.converged);
  CHECK(static_cast<int>(st.history.size()) <= cfg.max_outer_iters);

  double prev = -1e300;
  for (const auto& h : st.history) {
    CHECK(h.sum_mos_after_bf >= prev - 1e-6);
    CHECK(h.sum_mos >= h.sum_mos_after_bf - 1e-6);
    prev = h.sum_mos;
  }
  const auto& tail = st.history;
  if (tail.size() >= 2)
    CHECK(std::abs(tail.back().sum_mos - tail[tail.size() - 2].sum_mos) <= cfg.conv_eps);
}

TEST_CASE("final state is feasible") {
  const NetworkConfig cfg = small_config();
  const Geometry geo = small_geometry(cfg, 5);
  const ChannelParams params;
  const QoEParams qoe;
  const SolutionState st = run_aom(params, geo, cfg, qoe, 5);

  CHECK(check_kinematics(st.geo.trajectory, cfg).empty());
  const ChannelRealization ch =
      resample_at(params, st.geo, st.geo.trajectory, cfg, st.seed);
  for (int t = 0; t < cfg.num_slots; ++t) {
    CHECK(st.bf[t].total_power() <= cfg.p_max_watt * (1.0 + 1e-6));
    std::vector<CVec> h;
    for (int l = 0; l < cfg.num_users; ++l) h.push_back(ch.users[l][t]);
    const double budget = common_rate(h, st.bf[t], params.noise_power);
    double split = 0.0;
    for (double a : st.ra[t].a) {
      CHECK(a >= 0.0);
      split += a;
    }
    CHECK(split <= budget + 1e-4);
  }
  // the recorded objective matches an independent evaluation at the state
  const double replay = evaluate_all(ch, st.bf, st.ra, cfg, params, qoe, true).sum_mos;
  CHECK(std::abs(replay - st.sum_mos) <= 1e-9 * std::max(1.0, std::abs(st.sum_mos)));
}

TEST_CASE("same seed reruns bit-identically") {
  const NetworkConfig cfg = small_config();
  const Geometry geo = small_geometry(cfg, 11);
  const SolutionState a = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 11);
  const SolutionState b = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 11);
  CHECK(same_history(a, b));
  CHECK(a.sum_mos == b.sum_mos);
  REQUIRE(a.geo.trajectory.size() == b.geo.trajectory.size());
  for (size_t t = 0; t < a.geo.trajectory.size(); ++t)
    CHECK((a.geo.trajectory[t] - b.geo.trajectory[t]).norm() == 0.0);
}

TEST_CASE("resume with zero extra iterations is the identity") {
  NetworkConfig cfg = small_config();
  cfg.max_outer_iters = 1;
  const Geometry geo = small_geometry(cfg, 9);
  const SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 9);
  const SolutionState again = resume(st, 0);
  CHECK(same_history(st, again));
  CHECK(st.sum_mos == again.sum_mos);
}

TEST_CASE("checkpointed run matches an uninterrupted run") {
  NetworkConfig cfg = small_config();
  cfg.conv_eps = 1e-12;  // force the full budget so both paths iterate equally
  cfg.max_outer_iters = 3;
  const Geometry geo = small_geometry(cfg, 5);
  const SolutionState full = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 5);
  REQUIRE(full.history.size() == 3);

  NetworkConfig cfg1 = cfg;
  cfg1.max_outer_iters = 1;
  const SolutionState part = run_aom(ChannelParams{}, geo, cfg1, QoEParams{}, 5);
  REQUIRE(part.history.size() == 1);

  std::stringstream buf;
  save_checkpoint(part, buf);
  const SolutionState loaded = load_checkpoint(buf);
  CHECK(loaded.sum_mos == part.sum_mos);
  CHECK(same_history(loaded, part));

  const SolutionState resumed = resume(loaded, 2);
  CHECK(same_history(resumed, full));
  CHECK(resumed.sum_mos == full.sum_mos);
  for (size_t t = 0; t < full.geo.trajectory.size(); ++t)
    CHECK((resumed.geo.trajectory[t] - full.geo.trajectory[t]).norm() == 0.0);
}

TEST_CASE("resume of a converged state stays put") {
  const NetworkConfig cfg = small_config();
  const Geometry geo = small_geometry(cfg, 17);
  const SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 17);
  REQUIRE(st.converged);
  const SolutionState more = resume(st, 2);
  CHECK(more.sum_mos >= st.sum_mos - 1e-6);
  CHECK(std::abs(more.sum_mos - st.sum_mos) <= 2.0 * cfg.conv_eps + 1e-6);
}

TEST_CASE("checkpoint round trip is byte-stable") {
  NetworkConfig cfg = small_config();
  cfg.max_outer_iters = 1;
  const Geometry geo = small_geometry(cfg, 19);
  const SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 19);
  std::stringstream first;
  save_checkpoint(st, first);
  std::stringstream copy(first.str());
  std::stringstream second;
  save_checkpoint(load_checkpoint(copy), second);
  CHECK(first.str() == second.str());
}

TEST_CASE("tampered state is rejected by resume") {
  NetworkConfig cfg = small_config();
  cfg.max_outer_iters = 1;
  const Geometry geo = small_geometry(cfg, 23);
  SolutionState st = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 23);
  st.sum_mos += 1.0;  // history tail no longer matches
  CHECK_THROWS_WITH_AS(static_cast<void>(resume(st, 1)),
                       doctest::Contains("inconsistent"), std::runtime_error);

  SolutionState bad = run_aom(ChannelParams{}, geo, cfg, QoEParams{}, 23);
  bad.bf.pop_back();
  CHECK_THROWS_AS(static_cast<void>(resume(bad, 1)), std::runtime_error);

  std::stringstream garbage("not-a-checkpoint 1");
  CHECK_THROWS_AS(static_cast<void>(load_checkpoint(garbage)), std::runtime_error);
}
