#include "uavrsma/ao.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace uavrsma {

namespace {

constexpr double kMonotoneSlack = 1e-9;

/// Rescales each slot's common-rate split so it fits under the common rate of
/// the channels at the incumbent trajectory. The split cancels out of the
/// secrecy rate, so this keeps the objective untouched while restoring the
/// split-budget constraint after the trajectory (and hence the channels) move.
void clamp_rate_split(SolutionState& state, const ChannelRealization& ch) {
  const int T = state.cfg.num_slots;
  const int L = state.cfg.num_users;
  for (int t = 0; t < T; ++t) {
    std::vector<CVec> h;
    h.reserve(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) h.push_back(ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)]);
    const double budget = common_rate(h, state.bf[static_cast<size_t>(t)], state.params.noise_power);
    auto& a = state.ra[static_cast<size_t>(t)].a;
    double total = 0.0;
    for (double v : a) total += v;
    if (total <= budget || total <= 0.0) continue;
    const double scale = std::max(0.0, budget) / total;
    for (double& v : a) v *= scale;
  }
}

/// One outer iteration: beamforming step then trajectory step, each guarded
/// so the incumbent is only replaced by a point with no lower true sum MOS.
void outer_step(SolutionState& state, const AoOptions& opts, int outer_iter) {
  const auto t0 = std::chrono::steady_clock::now();
  OuterRecord rec;
  rec.outer_iter = outer_iter;

  ChannelRealization ch =
      resample_at(state.params, state.geo, state.geo.trajectory, state.cfg, state.seed);

  BfSolveOutput bo;
  bool bf_failed = false;
  try {
    bo = solve_bf(ch, state.cfg, state.qoe, state.params, state.bf, opts.bf);
  } catch (const std::exception& e) {
    // a rare numerical hiccup in one slot's restriction must not abort the
    // whole run: the incumbent stays valid and later iterations can recover
    bf_failed = true;
    state.warnings.push_back("outer " + std::to_string(outer_iter) +
                             " bf: step failed, kept incumbent (" + e.what() + ")");
  }
  rec.bf_inner_iters = bo.total_inner_iters;
  for (const auto& w : bo.warnings)
    state.warnings.push_back("outer " + std::to_string(outer_iter) + " bf: " + w);
  if (bf_failed || bo.sum_mos + kMonotoneSlack < state.sum_mos) {
    rec.bf_kept_incumbent = true;
    state.warnings.push_back("outer " + std::to_string(outer_iter) +
                             " bf: result below incumbent, kept incumbent");
  } else {
    state.bf = std::move(bo.bf);
    state.ra = std::move(bo.ra);
    state.aux = std::move(bo.aux);
    state.max_rank_one_gap = bo.max_rank_one_gap;
    state.sum_mos = bo.sum_mos;
  }
  rec.sum_mos_after_bf = state.sum_mos;

  // the beamforming step certifies worst-case secrecy >= eta; the trajectory
  // step must not trade that feasibility away for MOS
  TrajOptions topts = opts.traj;
  topts.min_secrecy = state.cfg.eta;
  TrajResult tr;
  bool traj_failed = false;
  try {
    tr = solve_traj(state.params, state.geo, state.cfg, state.qoe, state.seed, state.bf, state.ra,
                    topts);
  } catch (const std::exception& e) {
    traj_failed = true;
    state.warnings.push_back("outer " + std::to_string(outer_iter) +
                             " traj: step failed, kept incumbent (" + e.what() + ")");
  }
  rec.traj_inner_iters = tr.inner_iters;
  for (const auto& w : tr.warnings)
    state.warnings.push_back("outer " + std::to_string(outer_iter) + " traj: " + w);
  if (traj_failed || tr.sum_mos + kMonotoneSlack < state.sum_mos) {
    rec.traj_kept_incumbent = true;
    state.warnings.push_back("outer " + std::to_string(outer_iter) +
                             " traj: result below incumbent, kept incumbent");
  } else {
    state.geo.trajectory = tr.trajectory;
    state.slacks = std::move(tr.slacks);
    state.sum_mos = tr.sum_mos;
    const ChannelRealization moved =
        resample_at(state.params, state.geo, state.geo.trajectory, state.cfg, state.seed);
    clamp_rate_split(state, moved);
  }

  rec.sum_mos = state.sum_mos;
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  state.history.push_back(rec);
}

/// Runs outer iterations until the sum-MOS change drops to conv_eps or the
/// budget is exhausted. Assumes state.sum_mos matches the incumbent.
void run_loop(SolutionState& state, int budget, const AoOptions& opts) {
  for (int i = 0; i < budget; ++i) {
    const double prev = state.sum_mos;
    outer_step(state, opts, static_cast<int>(state.history.size()) + 1);
    if (std::abs(state.sum_mos - prev) <= state.cfg.conv_eps) {
      state.converged = true;
      return;
    }
  }
}

void check_consistent(const SolutionState& state) {
  const size_t T = static_cast<size_t>(state.cfg.num_slots);
  const size_t L = static_cast<size_t>(state.cfg.num_users);
  auto fail = [](const std::string& what) {
    throw std::runtime_error("resume: inconsistent state: " + what);
  };
  if (state.geo.trajectory.size() != T) fail("trajectory length");
  if (state.bf.size() != T) fail("beamformer slot count");
  if (state.ra.size() != T) fail("rate-split slot count");
  for (const auto& b : state.bf)
    if (b.w.size() != L) fail("private beam count");
  for (const auto& r : state.ra)
    if (r.a.size() != L) fail("rate-split length");
  if (!state.history.empty() &&
      state.history.back().sum_mos != state.sum_mos)
    fail("history tail disagrees with incumbent objective");
  for (size_t i = 1; i < state.history.size(); ++i)
    if (state.history[i].sum_mos + 1e-6 < state.history[i - 1].sum_mos)
      fail("history not monotone");
}

}  // namespace

SolutionState run_aom(const ChannelParams& params, const Geometry& geo, const NetworkConfig& cfg,
                      const QoEParams& qoe, unsigned long seed, const AoOptions& opts) {
  SolutionState state;
  state.cfg = cfg;
  state.qoe = qoe;
  state.params = params;
  state.geo = geo;
  state.seed = seed;
  if (state.geo.trajectory.empty()) state.geo.trajectory = straight_line_trajectory(cfg);
  const std::string kin = check_kinematics(state.geo.trajectory, cfg);
  if (!kin.empty()) throw std::runtime_error("run_aom: " + kin);

  const ChannelRealization ch =
      resample_at(params, state.geo, state.geo.trajectory, cfg, seed);
  const int T = cfg.num_slots;
  const int L = cfg.num_users;
  for (int t = 0; t < T; ++t) {
    std::vector<CVec> h;
    h.reserve(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) h.push_back(ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)]);
    state.bf.push_back(matched_filter_init(h, cfg.p_max_watt));
    RateAllocation ra;
    ra.a.assign(static_cast<size_t>(L), 0.0);
    state.ra.push_back(std::move(ra));
  }
  state.sum_mos =
      evaluate_all(ch, state.bf, state.ra, cfg, params, qoe, /*robust=*/true).sum_mos;

  run_loop(state, cfg.max_outer_iters, opts);
  return state;
}

SolutionState resume(SolutionState state, int extra_iters, const AoOptions& opts) {
  if (extra_iters < 0) throw std::invalid_argument("resume: extra_iters must be >= 0");
  check_consistent(state);
  if (extra_iters == 0) return state;
  state.converged = false;
  run_loop(state, extra_iters, opts);
  return state;
}

// ---------------------------------------------------------------------------
// Checkpointing: token-per-line text format, doubles in hex-float so the
// round trip is exact.

namespace {

constexpr const char* kMagic = "uavrsma-aom-checkpoint";
constexpr int kVersion = 1;

void put_d(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf << '\n';
}
void put_i(std::ostream& os, long long v) { os << v << '\n'; }
void put_s(std::ostream& os, const std::string& s) { os << s.size() << ' ' << s << '\n'; }
void put_vec2(std::ostream& os, const Vec2& v) {
  put_d(os, v.x());
  put_d(os, v.y());
}
void put_dvec(std::ostream& os, const std::vector<double>& v) {
  put_i(os, static_cast<long long>(v.size()));
  for (double x : v) put_d(os, x);
}
void put_dvv(std::ostream& os, const std::vector<std::vector<double>>& v) {
  put_i(os, static_cast<long long>(v.size()));
  for (const auto& row : v) put_dvec(os, row);
}
void put_dvvv(std::ostream& os, const std::vector<std::vector<std::vector<double>>>& v) {
  put_i(os, static_cast<long long>(v.size()));
  for (const auto& m : v) put_dvv(os, m);
}
void put_v2vec(std::ostream& os, const std::vector<Vec2>& v) {
  put_i(os, static_cast<long long>(v.size()));
  for (const auto& p : v) put_vec2(os, p);
}
void put_cvec(std::ostream& os, const CVec& v) {
  put_i(os, v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    put_d(os, v[i].real());
    put_d(os, v[i].imag());
  }
}

struct Reader {
  std::istream& is;
  std::string tok;

  std::string& next() {
    if (!(is >> tok)) throw std::runtime_error("load_checkpoint: truncated stream");
    return tok;
  }
  double d() {
    const std::string& t = next();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str()) throw std::runtime_error("load_checkpoint: bad number '" + t + "'");
    return v;
  }
  long long i() { return std::stoll(next()); }
  std::string s() {
    const size_t n = static_cast<size_t>(i());
    is.get();  // the separating space
    std::string out(n, '\0');
    if (n && !is.read(out.data(), static_cast<std::streamsize>(n)))
      throw std::runtime_error("load_checkpoint: truncated string");
    return out;
  }
  Vec2 vec2() {
    Vec2 v;
    v.x() = d();
    v.y() = d();
    return v;
  }
  std::vector<double> dvec() {
    std::vector<double> v(static_cast<size_t>(i()));
    for (double& x : v) x = d();
    return v;
  }
  std::vector<std::vector<double>> dvv() {
    std::vector<std::vector<double>> v(static_cast<size_t>(i()));
    for (auto& row : v) row = dvec();
    return v;
  }
  std::vector<std::vector<std::vector<double>>> dvvv() {
    std::vector<std::vector<std::vector<double>>> v(static_cast<size_t>(i()));
    for (auto& m : v) m = dvv();
    return v;
  }
  std::vector<Vec2> v2vec() {
    std::vector<Vec2> v(static_cast<size_t>(i()));
    for (auto& p : v) p = vec2();
    return v;
  }
  CVec cvec() {
    CVec v(static_cast<Eigen::Index>(i()));
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double re = d();
      const double im = d();
      v[k] = {re, im};
    }
    return v;
  }
};

}  // namespace

void save_checkpoint(const SolutionState& st, std::ostream& os) {
  os << kMagic << ' ' << kVersion << '\n';
  const NetworkConfig& c = st.cfg;
  put_i(os, c.num_users);
  put_i(os, c.num_eves);
  put_i(os, c.num_antennas);
  put_i(os, c.num_slots);
  put_d(os, c.slot_seconds);
  put_d(os, c.p_max_watt);
  put_d(os, c.eta);
  put_d(os, c.conv_eps);
  put_i(os, c.max_outer_iters);
  put_i(os, c.max_inner_iters);
  put_d(os, c.uav_speed);
  put_d(os, c.uav_altitude);
  put_vec2(os, c.q_start);
  put_vec2(os, c.q_final);
  const QoEParams& q = st.qoe;
  put_d(os, q.lambda1);
  put_d(os, q.lambda2);
  put_d(os, q.bandwidth_hz);
  put_d(os, q.content_bits);
  put_d(os, q.mos_floor);
  const ChannelParams& p = st.params;
  put_d(os, p.alpha);
  put_d(os, p.pl_los);
  put_d(os, p.pl_nlos);
  put_d(os, p.rician);
  put_d(os, p.noise_power);
  put_d(os, p.csi_eps);
  put_d(os, p.carrier_wavelength);
  put_d(os, p.shadowing_sigma_db);
  put_v2vec(os, st.geo.user_positions);
  put_v2vec(os, st.geo.eve_positions);
  put_v2vec(os, st.geo.trajectory);
  put_i(os, static_cast<long long>(st.seed));

  put_i(os, static_cast<long long>(st.bf.size()));
  for (const auto& b : st.bf) {
    put_cvec(os, b.w0);
    put_i(os, static_cast<long long>(b.w.size()));
    for (const auto& w : b.w) put_cvec(os, w);
  }
  put_i(os, static_cast<long long>(st.ra.size()));
  for (const auto& r : st.ra) put_dvec(os, r.a);
  put_i(os, static_cast<long long>(st.aux.size()));
  for (const auto& a : st.aux) {
    put_dvec(os, a.c1);
    put_dvec(os, a.c2);
    put_dvec(os, a.t);
    put_dvec(os, a.u);
    put_dvec(os, a.pi);
    put_dvec(os, a.c5);
    put_dvec(os, a.c6);
    put_dvv(os, a.c3);
    put_dvv(os, a.c4);
    put_d(os, a.beta);
  }
  put_dvv(os, st.slacks.a);
  put_dvv(os, st.slacks.b);
  put_dvv(os, st.slacks.r_ll);
  put_dvv(os, st.slacks.r_lj);
  put_dvvv(os, st.slacks.r_kk);
  put_dvvv(os, st.slacks.r_kj);
  put_v2vec(os, st.slacks.taylor.trajectory);
  put_dvv(os, st.slacks.taylor.a);
  put_dvv(os, st.slacks.taylor.b);
  put_d(os, st.sum_mos);
  put_d(os, st.max_rank_one_gap);
  put_i(os, st.converged ? 1 : 0);
  put_i(os, static_cast<long long>(st.history.size()));
  for (const auto& h : st.history) {
    put_i(os, h.outer_iter);
    put_d(os, h.sum_mos_after_bf);
    put_d(os, h.sum_mos);
    put_i(os, h.bf_inner_iters);
    put_i(os, h.traj_inner_iters);
    put_i(os, h.bf_kept_incumbent ? 1 : 0);
    put_i(os, h.traj_kept_incumbent ? 1 : 0);
    put_d(os, h.wall_ms);
  }
  put_i(os, static_cast<long long>(st.warnings.size()));
  for (const auto& w : st.warnings) put_s(os, w);
}

SolutionState load_checkpoint(std::istream& is) {
  Reader r{is, {}};
  if (r.next() != kMagic) throw std::runtime_error("load_checkpoint: not a checkpoint stream");
  if (r.i() != kVersion) throw std::runtime_error("load_checkpoint: unsupported version");

  SolutionState st;
  NetworkConfig& c = st.cfg;
  c.num_users = static_cast<int>(r.i());
  c.num_eves = static_cast<int>(r.i());
  c.num_antennas = static_cast<int>(r.i());
  c.num_slots = static_cast<int>(r.i());
  c.slot_seconds = r.d();
  c.p_max_watt = r.d();
  c.eta = r.d();
  c.conv_eps = r.d();
  c.max_outer_iters = static_cast<int>(r.i());
  c.max_inner_iters = static_cast<int>(r.i());
  c.uav_speed = r.d();
  c.uav_altitude = r.d();
  c.q_start = r.vec2();
  c.q_final = r.vec2();
  QoEParams& q = st.qoe;
  q.lambda1 = r.d();
  q.lambda2 = r.d();
  q.bandwidth_hz = r.d();
  q.content_bits = r.d();
  q.mos_floor = r.d();
  ChannelParams& p = st.params;
  p.alpha = r.d();
  p.pl_los = r.d();
  p.pl_nlos = r.d();
  p.rician = r.d();
  p.noise_power = r.d();
  p.csi_eps = r.d();
  p.carrier_wavelength = r.d();
  p.shadowing_sigma_db = r.d();
  st.geo.user_positions = r.v2vec();
  st.geo.eve_positions = r.v2vec();
  st.geo.trajectory = r.v2vec();
  st.seed = static_cast<unsigned long>(r.i());

  st.bf.resize(static_cast<size_t>(r.i()));
  for (auto& b : st.bf) {
    b.w0 = r.cvec();
    b.w.resize(static_cast<size_t>(r.i()));
    for (auto& w : b.w) w = r.cvec();
  }
  st.ra.resize(static_cast<size_t>(r.i()));
  for (auto& ra : st.ra) ra.a = r.dvec();
  st.aux.resize(static_cast<size_t>(r.i()));
  for (auto& a : st.aux) {
    a.c1 = r.dvec();
    a.c2 = r.dvec();
    a.t = r.dvec();
    a.u = r.dvec();
    a.pi = r.dvec();
    a.c5 = r.dvec();
    a.c6 = r.dvec();
    a.c3 = r.dvv();
    a.c4 = r.dvv();
    a.beta = r.d();
  }
  st.slacks.a = r.dvv();
  st.slacks.b = r.dvv();
  st.slacks.r_ll = r.dvv();
  st.slacks.r_lj = r.dvv();
  st.slacks.r_kk = r.dvvv();
  st.slacks.r_kj = r.dvvv();
  st.slacks.taylor.trajectory = r.v2vec();
  st.slacks.taylor.a = r.dvv();
  st.slacks.taylor.b = r.dvv();
  st.sum_mos = r.d();
  st.max_rank_one_gap = r.d();
  st.converged = r.i() != 0;
  st.history.resize(static_cast<size_t>(r.i()));
  for (auto& h : st.history) {
    h.outer_iter = static_cast<int>(r.i());
    h.sum_mos_after_bf = r.d();
    h.sum_mos = r.d();
    h.bf_inner_iters = static_cast<int>(r.i());
    h.traj_inner_iters = static_cast<int>(r.i());
    h.bf_kept_incumbent = r.i() != 0;
    h.traj_kept_incumbent = r.i() != 0;
    h.wall_ms = r.d();
  }
  st.warnings.resize(static_cast<size_t>(r.i()));
  for (auto& w : st.warnings) w = r.s();
  return st;
}

}  // namespace uavrsma
