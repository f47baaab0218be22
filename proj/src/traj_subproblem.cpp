#include "uavrsma/traj_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "uavrsma/solver.hpp"

namespace uavrsma {

using conic::ConicProgram;
using conic::ConicSolution;
using conic::LinExpr;
using conic::SolveStatus;
using conic::SolverOptions;
using conic::to_string;

namespace {

constexpr double kLn2 = 0.6931471805599453;

// sum of squares of `rows` plus constant k bounded by affine t:
// ||v||^2 + k <= t  <=>  ||(v, (t-k-1)/2)|| <= (t-k+1)/2
void add_quad_le(ConicProgram& prog, const std::vector<LinExpr>& rows, double k,
                 const LinExpr& t, const std::string& label) {
  std::vector<LinExpr> soc;
  soc.reserve(rows.size() + 2);
  soc.push_back(0.5 * (t - LinExpr(k - 1.0)));
  for (const auto& r : rows) soc.push_back(r);
  soc.push_back(0.5 * (t - LinExpr(k + 1.0)));
  prog.add_soc(std::move(soc), label);
}

double slant_distance(const Vec2& q, const Vec2& pos, double altitude) {
  return std::sqrt((q - pos).squaredNorm() + altitude * altitude);
}

double beam_power(const CVec& h, const CVec& w) { return std::norm(h.dot(w)); }
double gram_power(const CMat& G, const CVec& w) { return w.dot(G * w).real(); }

// Noise-normalized received powers of one slot with the fading frozen at the
// expansion trajectory; only the distance gains move afterwards.
struct SlotPowers {
  std::vector<double> s_tot;               // [l], (signal + interference)/sigma^2
  std::vector<double> i_self;              // [l], interference/sigma^2
  std::vector<std::vector<double>> e_tot;  // [l][k], eve (beam-l + rest)/sigma^2
  std::vector<std::vector<double>> e_int;  // [l][k], eve interference/sigma^2
  std::vector<double> sec0;                // [l], robust secrecy at expansion
  std::vector<bool> active;                // [l]
};

SlotPowers slot_powers(const ChannelRealization& ch, const Beamformers& bf, int t, int L, int K,
                       double sigma2, double active_floor) {
  SlotPowers p;
  p.s_tot.resize(static_cast<size_t>(L));
  p.i_self.resize(static_cast<size_t>(L));
  p.e_tot.assign(static_cast<size_t>(L), std::vector<double>(static_cast<size_t>(K)));
  p.e_int = p.e_tot;
  p.sec0.resize(static_cast<size_t>(L));
  p.active.resize(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    const CVec& h = ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)];
    double sig = beam_power(h, bf.w[static_cast<size_t>(l)]) / sigma2;
    double interf = 0.0;
    for (int j = 0; j < L; ++j)
      if (j != l) interf += beam_power(h, bf.w[static_cast<size_t>(j)]) / sigma2;
    p.i_self[static_cast<size_t>(l)] = interf;
    p.s_tot[static_cast<size_t>(l)] = sig + interf;
    double worst_eve = 0.0;
    for (int k = 0; k < K; ++k) {
      const CMat& gw = ch.gram_worst[static_cast<size_t>(k)][static_cast<size_t>(t)];
      const CMat& gb = ch.gram_best[static_cast<size_t>(k)][static_cast<size_t>(t)];
      double num = gram_power(gw, bf.w[static_cast<size_t>(l)]) / sigma2;
      double den = gram_power(gb, bf.w0) / sigma2;
      for (int j = 0; j < L; ++j)
        if (j != l) den += gram_power(gb, bf.w[static_cast<size_t>(j)]) / sigma2;
      p.e_tot[static_cast<size_t>(l)][static_cast<size_t>(k)] = num + den;
      p.e_int[static_cast<size_t>(l)][static_cast<size_t>(k)] = den;
      worst_eve = std::max(worst_eve, std::log2((1.0 + num + den) / (1.0 + den)));
    }
    const double rp = std::log2((1.0 + sig + interf) / (1.0 + interf));
    p.sec0[static_cast<size_t>(l)] = rp - worst_eve;
    p.active[static_cast<size_t>(l)] = p.sec0[static_cast<size_t>(l)] > active_floor;
  }
  return p;
}

// Secrecy rate of the frozen-fading model when the distance gains move from
// the expansion point by the ratios g_user / g_eve (each (d_new/d_tau)^-alpha).
double frozen_secrecy(const SlotPowers& p, int l, double g_user, const std::vector<double>& g_eve) {
  const double st = p.s_tot[static_cast<size_t>(l)];
  const double in = p.i_self[static_cast<size_t>(l)];
  double sec = std::log2((1.0 + g_user * st) / (1.0 + g_user * in));
  double worst = 0.0;
  for (size_t k = 0; k < g_eve.size(); ++k) {
    const double et = p.e_tot[static_cast<size_t>(l)][k];
    const double ei = p.e_int[static_cast<size_t>(l)][k];
    worst = std::max(worst, std::log2((1.0 + g_eve[k] * et) / (1.0 + g_eve[k] * ei)));
  }
  return sec - worst;
}

// Pull tiny solver-tolerance violations back onto the kinematic feasible set.
void snap_kinematics(std::vector<Vec2>& q, const NetworkConfig& cfg) {
  const double d_max = cfg.step_bound();
  const int T = static_cast<int>(q.size());
  q[0] = cfg.q_start;
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int t = 1; t < T; ++t) {
      const Vec2 step = q[static_cast<size_t>(t)] - q[static_cast<size_t>(t - 1)];
      const double d = step.norm();
      if (d > d_max) q[static_cast<size_t>(t)] = q[static_cast<size_t>(t - 1)] + step * (d_max / d);
    }
    const Vec2 tail = q[static_cast<size_t>(T - 1)] - cfg.q_final;
    const double dF = tail.norm();
    if (dF > d_max) q[static_cast<size_t>(T - 1)] = cfg.q_final + tail * (d_max / dF);
  }
}

}  // namespace

LinExpr quadratic_lower_block(int x_var, double x_prev) {
  return LinExpr::var(x_var, 2.0 * x_prev) - LinExpr(x_prev * x_prev);
}

void distance_gain_user_block(ConicProgram& prog, int qx, int qy, const Vec2& /*q_prev*/,
                              const Vec2& node_pos, int a_hat_var, double a_prev, double alpha,
                              double altitude, double length_scale) {
  if (a_prev <= 0.0) throw std::domain_error("distance_gain_user_block: a_prev must be positive");
  if (alpha <= 2.0) throw std::domain_error("distance_gain_user_block: alpha must exceed 2");
  const double rho = length_scale;
  const double e = 4.0 / alpha;
  // tangent of (a_prev * a_hat)^{-e} at a_hat = 1, scaled by 1/rho^2
  const double base = std::pow(a_prev, -e) / (rho * rho);
  const LinExpr rhs = LinExpr(base * (1.0 + e)) - LinExpr::var(a_hat_var, base * e);
  std::vector<LinExpr> rows{LinExpr::var(qx) - LinExpr(node_pos.x() / rho),
                            LinExpr::var(qy) - LinExpr(node_pos.y() / rho)};
  const double k = (altitude / rho) * (altitude / rho);
  add_quad_le(prog, rows, k, rhs, "gain-user");
}

void distance_gain_eve_block(ConicProgram& prog, int qx, int qy, const Vec2& q_prev,
                             const Vec2& node_pos, int b_hat_var, double b_prev, double alpha,
                             double altitude, double length_scale) {
  if (b_prev <= 0.0) throw std::domain_error("distance_gain_eve_block: b_prev must be positive");
  if (alpha <= 2.0) throw std::domain_error("distance_gain_eve_block: alpha must exceed 2");
  const double rho = length_scale;
  const double e = 4.0 / alpha;
  const Vec2 diff = q_prev - node_pos;
  const double d2_prev = (diff.squaredNorm() + altitude * altitude) / (rho * rho);
  // affine minorant of the scaled squared distance at q_prev
  LinExpr rhs(d2_prev - 2.0 * (diff.x() * q_prev.x() + diff.y() * q_prev.y()) / (rho * rho));
  rhs += LinExpr::var(qx, 2.0 * diff.x() / rho) + LinExpr::var(qy, 2.0 * diff.y() / rho);
  // (b_prev b_hat)^{-e} / rho^2 <= rhs through logarithms:
  // lb <= ln(b_hat), x >= c0 - e*lb, exp(x) <= rhs
  const double c0 = -e * std::log(b_prev) - 2.0 * std::log(rho);
  const int aux = prog.add_vars(2);
  const int lb = aux, x = aux + 1;
  prog.add_exp(LinExpr::var(lb), LinExpr(1.0), LinExpr::var(b_hat_var), "gain-eve-log");
  prog.add_exp(LinExpr::var(x), LinExpr(1.0), rhs, "gain-eve-dist");
  prog.add_nonneg(LinExpr::var(x) + LinExpr::var(lb, e) - LinExpr(c0), "gain-eve-link");
}

void kinematics_block(ConicProgram& prog, int q_base, const NetworkConfig& cfg,
                      double length_scale) {
  const double rho = length_scale;
  const double d_max = cfg.step_bound() / rho;
  const int T = cfg.num_slots;
  auto qx = [&](int t) { return LinExpr::var(q_base + 2 * t); };
  auto qy = [&](int t) { return LinExpr::var(q_base + 2 * t + 1); };
  prog.add_zero(qx(0) - LinExpr(cfg.q_start.x() / rho), "kin-start");
  prog.add_zero(qy(0) - LinExpr(cfg.q_start.y() / rho), "kin-start");
  for (int t = 0; t + 1 < T; ++t)
    prog.add_soc({LinExpr(d_max), qx(t + 1) - qx(t), qy(t + 1) - qy(t)}, "kin-step");
  prog.add_soc({LinExpr(d_max), qx(T - 1) - LinExpr(cfg.q_final.x() / rho),
                qy(T - 1) - LinExpr(cfg.q_final.y() / rho)},
               "kin-final");
}

double rtilde_exact(double r_ll, double r_lj, double r_kk, double r_kj) {
  return std::log2(1.0 + r_ll) - std::log2(1.0 + r_lj) - std::log2(1.0 + r_kk) +
         std::log2(1.0 + r_kj);
}

double rtilde_surrogate(double r_ll, double r_lj, double r_kk, double r_kj, double r_lj_tau,
                        double r_kk_tau) {
  if (r_lj_tau < 0.0 || r_kk_tau < 0.0)
    throw std::domain_error("rtilde_surrogate: expansion slacks must be nonnegative");
  const auto tangent = [](double r, double r_tau) {
    return (std::log(1.0 + r_tau) + (r - r_tau) / (1.0 + r_tau)) / kLn2;
  };
  return std::log2(1.0 + r_ll) - tangent(r_lj, r_lj_tau) - tangent(r_kk, r_kk_tau) +
         std::log2(1.0 + r_kj);
}

std::string check_kinematics(const std::vector<Vec2>& trajectory, const NetworkConfig& cfg,
                             double tol) {
  std::ostringstream msg;
  if (static_cast<int>(trajectory.size()) != cfg.num_slots) {
    msg << "trajectory holds " << trajectory.size() << " slots, expected " << cfg.num_slots;
    return msg.str();
  }
  const double d_max = cfg.step_bound();
  const double slack = tol * std::max(1.0, d_max);
  if ((trajectory[0] - cfg.q_start).norm() > slack) {
    msg << "trajectory[0] is not q_start";
    return msg.str();
  }
  for (size_t t = 0; t + 1 < trajectory.size(); ++t) {
    const double d = (trajectory[t + 1] - trajectory[t]).norm();
    if (d > d_max + slack) {
      msg << "step " << t << " -> " << (t + 1) << " travels " << d << " m, bound " << d_max;
      return msg.str();
    }
  }
  const double dF = (trajectory.back() - cfg.q_final).norm();
  if (dF > d_max + slack) {
    msg << "terminal point lies " << dF << " m from q_final, bound " << d_max;
    return msg.str();
  }
  return {};
}

TrajResult solve_traj(const ChannelParams& params, const Geometry& geo, const NetworkConfig& cfg,
                      const QoEParams& qoe, unsigned long seed,
                      const std::vector<Beamformers>& bf, const std::vector<RateAllocation>& ra,
                      const TrajOptions& opts) {
  const int T = cfg.num_slots;
  const int L = static_cast<int>(geo.user_positions.size());
  const int K = static_cast<int>(geo.eve_positions.size());
  if (static_cast<int>(bf.size()) != T)
    throw std::invalid_argument("solve_traj: one beamformer set per slot required");
  if (params.alpha <= 2.0) throw std::domain_error("solve_traj: alpha must exceed 2");
  const std::string kin = check_kinematics(geo.trajectory, cfg);
  if (!kin.empty()) throw std::runtime_error("solve_traj: infeasible initialization: " + kin);

  const double rho = std::max(1.0, cfg.uav_altitude);
  const double z = cfg.uav_altitude;
  const double gain_exp = -params.alpha / 2.0;
  const double active_floor = 1e-6;  // bit/s/Hz; below this the MOS is floored anyway
  const double const_mos =
      qoe.lambda2 + qoe.lambda1 * std::log(qoe.bandwidth_hz / qoe.content_bits);

  const auto secrecy_floor = [&](const MetricsReport& rep) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& slot : rep.secrecy_rate)
      for (double s : slot) lo = std::min(lo, s);
    return lo;
  };

  TrajResult out;
  std::vector<Vec2> cur = geo.trajectory;
  ChannelRealization ch = resample_at(params, geo, cur, cfg, seed);
  const MetricsReport rep0 = evaluate_all(ch, bf, ra, cfg, params, qoe, true);
  double cur_mos = rep0.sum_mos;
  double cur_floor = secrecy_floor(rep0);
  double prev_surr = -std::numeric_limits<double>::infinity();

  for (int it = 0; it < opts.max_inner_iters; ++it) {
    // frozen powers and activity at the expansion point
    std::vector<SlotPowers> pw;
    pw.reserve(static_cast<size_t>(T));
    bool any_active = false;
    for (int t = 0; t < T; ++t) {
      pw.push_back(slot_powers(ch, bf[static_cast<size_t>(t)], t, L, K, params.noise_power,
                               active_floor));
      for (int l = 0; l < L; ++l) any_active = any_active || pw.back().active[static_cast<size_t>(l)];
    }
    if (!any_active) {
      out.warnings.push_back(
          "no user has positive secrecy at the expansion point; trajectory left unchanged");
      break;
    }

    ConicProgram prog;
    const int q_base = prog.add_vars(2 * T);
    kinematics_block(prog, q_base, cfg, rho);

    std::vector<std::vector<int>> v_ahat(static_cast<size_t>(T), std::vector<int>(static_cast<size_t>(L), -1));
    auto v_u = v_ahat, v_s = v_ahat;
    std::vector<std::vector<int>> v_bhat(static_cast<size_t>(T), std::vector<int>(static_cast<size_t>(K), -1));

    for (int t = 0; t < T; ++t) {
      const SlotPowers& p = pw[static_cast<size_t>(t)];
      const int qx = q_base + 2 * t, qy = q_base + 2 * t + 1;
      bool slot_active = false;
      for (int l = 0; l < L; ++l) slot_active = slot_active || p.active[static_cast<size_t>(l)];
      if (!slot_active) continue;

      // shared eavesdropper gain slacks
      std::vector<double> b_tau(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        const double d_tau =
            slant_distance(cur[static_cast<size_t>(t)], geo.eve_positions[static_cast<size_t>(k)], z);
        b_tau[static_cast<size_t>(k)] = std::pow(d_tau, gain_exp);
        const int bhat = prog.add_vars(1);
        v_bhat[static_cast<size_t>(t)][static_cast<size_t>(k)] = bhat;
        distance_gain_eve_block(prog, qx, qy, cur[static_cast<size_t>(t)],
                                geo.eve_positions[static_cast<size_t>(k)], bhat,
                                b_tau[static_cast<size_t>(k)], params.alpha, z, rho);
        // altitude caps the eavesdropper gain
        const double cap = std::pow(z, gain_exp) / b_tau[static_cast<size_t>(k)];
        prog.add_nonneg(LinExpr(cap) - LinExpr::var(bhat), "eve-gain-cap");
      }

      for (int l = 0; l < L; ++l) {
        if (!p.active[static_cast<size_t>(l)]) continue;
        const double d_tau =
            slant_distance(cur[static_cast<size_t>(t)], geo.user_positions[static_cast<size_t>(l)], z);
        const double a_tau = std::pow(d_tau, gain_exp);
        const int ahat = prog.add_vars(1);
        v_ahat[static_cast<size_t>(t)][static_cast<size_t>(l)] = ahat;
        prog.add_nonneg(LinExpr::var(ahat), "a-nonneg");
        distance_gain_user_block(prog, qx, qy, cur[static_cast<size_t>(t)],
                                 geo.user_positions[static_cast<size_t>(l)], ahat, a_tau,
                                 params.alpha, z, rho);

        const double s_tot = p.s_tot[static_cast<size_t>(l)];
        const double i_self = p.i_self[static_cast<size_t>(l)];
        const double A = 1.0 + s_tot, B = 1.0 + i_self;

        // v1 <= ln[(1 + s_tot (2 ahat - 1)) / A], exact 0 at ahat = 1
        const int v1 = prog.add_vars(1);
        {
          LinExpr rhs((1.0 - s_tot) / A);
          rhs += LinExpr::var(ahat, 2.0 * s_tot / A);
          prog.add_exp(LinExpr::var(v1), LinExpr(1.0), rhs, "user-signal-log");
        }
        // y2 = (r_lj - i_self)/B with i_self ahat^2 <= r_lj
        const int y2 = prog.add_vars(1);
        add_quad_le(prog, {LinExpr::var(ahat, std::sqrt(i_self / B))}, 0.0,
                    LinExpr(i_self / B) + LinExpr::var(y2), "user-interf");

        const int s = prog.add_vars(1);
        const int u = prog.add_vars(1);
        v_s[static_cast<size_t>(t)][static_cast<size_t>(l)] = s;
        v_u[static_cast<size_t>(t)][static_cast<size_t>(l)] = u;
        prog.add_exp(LinExpr::var(u), LinExpr(1.0), LinExpr::var(s), "log-mos");
        prog.add_objective(u, qoe.lambda1);

        // user-side surrogate in nats: v1 + ln A - ln B - y2
        LinExpr user_part = LinExpr::var(v1) + LinExpr(std::log(A) - std::log(B)) -
                            LinExpr::var(y2);
        if (K == 0) {
          prog.add_nonneg(user_part - LinExpr::var(s, kLn2), "secrecy-link");
        }
        for (int k = 0; k < K; ++k) {
          const double e_tot = p.e_tot[static_cast<size_t>(l)][static_cast<size_t>(k)];
          const double e_int = p.e_int[static_cast<size_t>(l)][static_cast<size_t>(k)];
          const double C = 1.0 + e_tot, D = 1.0 + e_int;
          const int bhat = v_bhat[static_cast<size_t>(t)][static_cast<size_t>(k)];
          // y3 = (r_kk - e_tot)/C with e_tot bhat^2 <= r_kk
          const int y3 = prog.add_vars(1);
          add_quad_le(prog, {LinExpr::var(bhat, std::sqrt(e_tot / C))}, 0.0,
                      LinExpr(e_tot / C) + LinExpr::var(y3), "eve-total");
          // v4 <= ln[(1 + e_int (2 bhat - 1)) / D]
          const int v4 = prog.add_vars(1);
          {
            LinExpr rhs((1.0 - e_int) / D);
            rhs += LinExpr::var(bhat, 2.0 * e_int / D);
            prog.add_exp(LinExpr::var(v4), LinExpr(1.0), rhs, "eve-interf-log");
          }
          LinExpr row = user_part - LinExpr::var(y3) + LinExpr::var(v4) +
                        LinExpr(std::log(D) - std::log(C)) - LinExpr::var(s, kLn2);
          prog.add_nonneg(std::move(row), "secrecy-link");
        }
      }
    }

    SolverOptions sopts;
    sopts.tol = opts.solver_tol;
    const ConicSolution sol = conic::solve(prog, sopts);
    if (sol.status != SolveStatus::Optimal) {
      const std::string what =
          std::string("convex restriction ") + to_string(sol.status);
      if (it == 0)
        throw std::runtime_error("solve_traj: " + what + " at the initialization point");
      out.warnings.push_back(what + "; keeping the last accepted trajectory");
      break;
    }

    std::vector<Vec2> q_new(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
      q_new[static_cast<size_t>(t)] =
          Vec2(sol.x[q_base + 2 * t] * rho, sol.x[q_base + 2 * t + 1] * rho);
    snap_kinematics(q_new, cfg);

    // surrogate objective in slot-averaged MOS units, floored like the true MOS
    double surr = 0.0;
    for (int t = 0; t < T; ++t)
      for (int l = 0; l < L; ++l) {
        if (v_u[static_cast<size_t>(t)][static_cast<size_t>(l)] >= 0)
          surr += std::max(qoe.mos_floor,
                           qoe.lambda1 * sol.x[v_u[static_cast<size_t>(t)][static_cast<size_t>(l)]] +
                               const_mos);
        else
          surr += mos(pw[static_cast<size_t>(t)].sec0[static_cast<size_t>(l)], qoe);
      }
    surr /= static_cast<double>(T);

    // minorant soundness: the slack-space secrecy bound may not exceed the
    // frozen-fading secrecy at the new trajectory
    for (int t = 0; t < T; ++t) {
      std::vector<double> g_eve(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        const double d_new =
            slant_distance(q_new[static_cast<size_t>(t)], geo.eve_positions[static_cast<size_t>(k)], z);
        const double d_old =
            slant_distance(cur[static_cast<size_t>(t)], geo.eve_positions[static_cast<size_t>(k)], z);
        g_eve[static_cast<size_t>(k)] = std::pow(d_new / d_old, -params.alpha);
      }
      for (int l = 0; l < L; ++l) {
        const int s = v_s[static_cast<size_t>(t)][static_cast<size_t>(l)];
        if (s < 0) continue;
        const double d_new =
            slant_distance(q_new[static_cast<size_t>(t)], geo.user_positions[static_cast<size_t>(l)], z);
        const double d_old =
            slant_distance(cur[static_cast<size_t>(t)], geo.user_positions[static_cast<size_t>(l)], z);
        const double g_user = std::pow(d_new / d_old, -params.alpha);
        const double frozen = frozen_secrecy(pw[static_cast<size_t>(t)], l, g_user, g_eve);
        if (sol.x[s] > frozen + 1e-6) {
          std::ostringstream msg;
          msg << "minorant violated at slot " << t << " user " << l << ": bound " << sol.x[s]
              << " exceeds frozen-model secrecy " << frozen;
          out.warnings.push_back(msg.str());
        }
      }
    }

    // accept only when the true (re-synthesized channel) objective holds up
    ChannelRealization ch_new = resample_at(params, geo, q_new, cfg, seed);
    const MetricsReport rep_new = evaluate_all(ch_new, bf, ra, cfg, params, qoe, true);
    const double m_new = rep_new.sum_mos;
    if (m_new < cur_mos - 1e-9) {
      out.warnings.push_back("trajectory step rejected: true sum MOS decreased");
      break;
    }
    const double f_new = secrecy_floor(rep_new);
    if (f_new + 1e-9 < std::min(opts.min_secrecy, cur_floor)) {
      out.warnings.push_back("trajectory step rejected: worst-case secrecy fell below the floor");
      break;
    }
    cur = std::move(q_new);
    ch = std::move(ch_new);
    cur_mos = m_new;
    cur_floor = f_new;
    out.surrogate_obj = surr;
    ++out.inner_iters;
    if (it > 0 && surr - prev_surr < opts.inner_tol) break;
    prev_surr = surr;
  }

  // slacks at their exact values induced by the accepted trajectory
  out.trajectory = cur;
  out.sum_mos = cur_mos;
  TrajSlacks& sl = out.slacks;
  sl.a.assign(static_cast<size_t>(L), std::vector<double>(static_cast<size_t>(T)));
  sl.b.assign(static_cast<size_t>(K), std::vector<double>(static_cast<size_t>(T)));
  sl.r_ll = sl.a;
  sl.r_lj = sl.a;
  sl.r_kk.assign(static_cast<size_t>(L),
                 std::vector<std::vector<double>>(static_cast<size_t>(K),
                                                  std::vector<double>(static_cast<size_t>(T))));
  sl.r_kj = sl.r_kk;
  sl.taylor.trajectory = cur;
  sl.taylor.a = sl.a;
  sl.taylor.b = sl.b;
  for (int t = 0; t < T; ++t) {
    const SlotPowers p =
        slot_powers(ch, bf[static_cast<size_t>(t)], t, L, K, params.noise_power, active_floor);
    for (int l = 0; l < L; ++l) {
      const double d =
          slant_distance(cur[static_cast<size_t>(t)], geo.user_positions[static_cast<size_t>(l)], z);
      sl.a[static_cast<size_t>(l)][static_cast<size_t>(t)] = std::pow(d, gain_exp);
      sl.taylor.a[static_cast<size_t>(l)][static_cast<size_t>(t)] = std::pow(d, gain_exp);
      sl.r_ll[static_cast<size_t>(l)][static_cast<size_t>(t)] = p.s_tot[static_cast<size_t>(l)];
      sl.r_lj[static_cast<size_t>(l)][static_cast<size_t>(t)] = p.i_self[static_cast<size_t>(l)];
      for (int k = 0; k < K; ++k) {
        sl.r_kk[static_cast<size_t>(l)][static_cast<size_t>(k)][static_cast<size_t>(t)] =
            p.e_tot[static_cast<size_t>(l)][static_cast<size_t>(k)];
        sl.r_kj[static_cast<size_t>(l)][static_cast<size_t>(k)][static_cast<size_t>(t)] =
            p.e_int[static_cast<size_t>(l)][static_cast<size_t>(k)];
      }
    }
    for (int k = 0; k < K; ++k) {
      const double d =
          slant_distance(cur[static_cast<size_t>(t)], geo.eve_positions[static_cast<size_t>(k)], z);
      sl.b[static_cast<size_t>(k)][static_cast<size_t>(t)] = std::pow(d, gain_exp);
      sl.taylor.b[static_cast<size_t>(k)][static_cast<size_t>(t)] = std::pow(d, gain_exp);
    }
  }
  return out;
}

}  // namespace uavrsma
