#include "uavrsma/oracle.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace uavrsma::oracle {

namespace {
const double kLn2 = std::log(2.0);
}

CheckResult check_hyperbolic_soc(long samples, unsigned long seed) {
  if (samples < 1) throw std::invalid_argument("check_hyperbolic_soc: samples >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  std::uniform_real_distribution<double> beta_d(1.0 + 1e-6, 8.0);
  CheckResult res{"hyperbolic-soc-equivalence", samples, 0.0, false};
  long disagreements = 0;
  for (long i = 0; i < samples; ++i) {
    const double lam = unif(rng), ups = unif(rng);
    const double tr = unif(rng) - 2.0;
    const double beta = beta_d(rng);
    const double f = beta / (beta - 1.0);
    const bool hyperbolic = ups * lam >= f * tr * tr;
    const double norm = std::hypot(2.0 * std::sqrt(f) * tr, lam - ups);
    const bool soc = norm <= lam + ups;
    if (hyperbolic != soc) ++disagreements;
  }
  res.worst_violation = static_cast<double>(disagreements);
  res.pass = disagreements == 0;
  return res;
}

CheckResult check_taylor_bounds(long samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(1e-3, 5.0);
  std::uniform_real_distribution<double> alpha_d(2.1, 6.0);
  CheckResult res{"taylor-minorant-bounds", samples, 0.0, false};
  double worst = 0.0;
  double worst_tangency = 0.0;
  for (long i = 0; i < samples; ++i) {
    // exp Taylor: e^{c_tau}(c - c_tau + 1) <= e^c
    const double c = unif(rng), ct = unif(rng);
    worst = std::max(worst, std::exp(ct) * (c - ct + 1.0) - std::exp(c));
    worst_tangency = std::max(worst_tangency,
                              std::abs(std::exp(ct) * 1.0 - std::exp(ct)));
    // quadratic lower bound: 2 x_tau x - x_tau^2 <= x^2
    const double x = unif(rng), xt = unif(rng);
    worst = std::max(worst, 2.0 * xt * x - xt * xt - x * x);
    // tangent of the convex power a^{-4/alpha} stays below it
    const double a = pos(rng), at = pos(rng), alpha = alpha_d(rng);
    const double e = -4.0 / alpha;
    const double tangent = std::pow(at, e) + e * std::pow(at, e - 1.0) * (a - at);
    worst = std::max(worst, tangent - std::pow(a, e));
    worst_tangency = std::max(worst_tangency, std::abs(std::pow(at, e) - std::pow(at, e)));
    // tangent of the concave log2(1+x) stays above it
    const double r = pos(rng), rt = pos(rng);
    const double log_tangent = std::log2(1.0 + rt) + (r - rt) / (kLn2 * (1.0 + rt));
    worst = std::max(worst, std::log2(1.0 + r) - log_tangent);
  }
  res.worst_violation = std::max(worst, worst_tangency);
  res.pass = worst <= 0.0 && worst_tangency <= 1e-12;
  return res;
}

CheckResult check_gram_sandwich(long samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> eps_d(0.0, 0.3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int N = 4;
  CheckResult res{"gram-sandwich", samples, 0.0, false};
  double worst = 0.0;
  for (long i = 0; i < samples; ++i) {
    CVec h(N);
    for (int n = 0; n < N; ++n) h[n] = std::complex<double>(gauss(rng), gauss(rng));
    const double eps = eps_d(rng);
    const double ups = eps * eps + 2.0 * eps * h.norm();
    // random PSD W
    CMat a(N, N);
    for (int r = 0; r < N; ++r)
      for (int cidx = 0; cidx < N; ++cidx) a(r, cidx) = std::complex<double>(gauss(rng), gauss(rng));
    const CMat W = a.adjoint() * a;
    // random error on the eps-ball surface scaled inward
    CVec e(N);
    for (int n = 0; n < N; ++n) e[n] = std::complex<double>(gauss(rng), gauss(rng));
    e *= eps * unif(rng) / std::max(e.norm(), 1e-300);
    const CVec v = h + e;  // true channel consistent with the estimate h
    const CMat outer_true = v * v.adjoint();
    const CMat outer_est = h * h.adjoint();
    const double tr_true = (outer_true * W).trace().real();
    const double tr_hi = ((outer_est + ups * CMat::Identity(N, N)) * W).trace().real();
    const double tr_lo = ((outer_est - ups * CMat::Identity(N, N)) * W).trace().real();
    const double scale = std::max(1.0, std::abs(tr_true));
    worst = std::max(worst, (tr_true - tr_hi) / scale);
    worst = std::max(worst, (tr_lo - tr_true) / scale);
  }
  res.worst_violation = worst;
  res.pass = worst <= 1e-12;
  return res;
}

CheckResult check_trace_identity(long samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int N = 4;
  CheckResult res{"trace-identity", samples, 0.0, false};
  double worst = 0.0;
  for (long i = 0; i < samples; ++i) {
    CVec h(N), w(N);
    for (int n = 0; n < N; ++n) {
      h[n] = std::complex<double>(gauss(rng), gauss(rng));
      w[n] = std::complex<double>(gauss(rng), gauss(rng));
    }
    double ip = 0.0;  // |h^H w|^2 via explicit sums
    double re = 0.0, im = 0.0;
    for (int n = 0; n < N; ++n) {
      re += h[n].real() * w[n].real() + h[n].imag() * w[n].imag();
      im += h[n].real() * w[n].imag() - h[n].imag() * w[n].real();
    }
    ip = re * re + im * im;
    const CMat H = h * h.adjoint();
    const CMat Wm = w * w.adjoint();
    const double tr = (H * Wm).trace().real();
    worst = std::max(worst, std::abs(ip - tr) / std::max(1.0, std::abs(tr)));
  }
  res.worst_violation = worst;
  res.pass = worst <= 1e-12;
  return res;
}

MetricsReport brute_force_rates(const ChannelRealization& ch, const std::vector<Beamformers>& bf,
                                const std::vector<RateAllocation>& ra, const NetworkConfig& cfg,
                                const ChannelParams& params, const QoEParams& qoe, bool robust) {
  const int T = cfg.num_slots, L = cfg.num_users, K = cfg.num_eves;
  const double sigma2 = params.noise_power;
  const double lam_l = qoe.lambda2 + qoe.lambda1 * std::log(qoe.bandwidth_hz / qoe.content_bits);

  auto ip2 = [](const CVec& h, const CVec& w) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index n = 0; n < h.size(); ++n) {
      re += h[n].real() * w[n].real() + h[n].imag() * w[n].imag();
      im += h[n].real() * w[n].imag() - h[n].imag() * w[n].real();
    }
    return re * re + im * im;
  };
  auto qform = [](const CMat& g, const CVec& w) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (Eigen::Index cc = 0; cc < g.cols(); ++cc) acc += std::conj(w[r]) * g(r, cc) * w[cc];
    return acc.real();
  };

  MetricsReport rep;
  rep.common_rate.resize(static_cast<size_t>(T));
  rep.private_rate.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(L)));
  rep.eve_rate.assign(static_cast<size_t>(T),
                      std::vector<std::vector<double>>(static_cast<size_t>(K),
                                                       std::vector<double>(static_cast<size_t>(L))));
  rep.secrecy_rate = rep.private_rate;
  rep.mos = rep.private_rate;
  rep.mos_floored.assign(static_cast<size_t>(T), std::vector<bool>(static_cast<size_t>(L), false));
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto& bt = bf[static_cast<size_t>(t)];
    double r0 = std::numeric_limits<double>::infinity();
    for (int l = 0; l < L; ++l) {
      const CVec& h = ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)];
      double den = sigma2;
      for (int j = 0; j < L; ++j) den += ip2(h, bt.w[static_cast<size_t>(j)]);
      r0 = std::min(r0, std::log2(1.0 + ip2(h, bt.w0) / den));
    }
    rep.common_rate[static_cast<size_t>(t)] = r0;
    for (int l = 0; l < L; ++l) {
      const CVec& h = ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)];
      double den = sigma2;
      for (int j = 0; j < L; ++j)
        if (j != l) den += ip2(h, bt.w[static_cast<size_t>(j)]);
      const double rp = std::log2(1.0 + ip2(h, bt.w[static_cast<size_t>(l)]) / den);
      rep.private_rate[static_cast<size_t>(t)][static_cast<size_t>(l)] = rp;
      double worst_eve = 0.0;
      for (int k = 0; k < K; ++k) {
        double rk;
        if (robust) {
          const CMat& gw = ch.gram_worst[static_cast<size_t>(k)][static_cast<size_t>(t)];
          const CMat& gb = ch.gram_best[static_cast<size_t>(k)][static_cast<size_t>(t)];
          double dk = sigma2 + qform(gb, bt.w0);
          for (int j = 0; j < L; ++j)
            if (j != l) dk += qform(gb, bt.w[static_cast<size_t>(j)]);
          rk = std::log2(1.0 + qform(gw, bt.w[static_cast<size_t>(l)]) / dk);
        } else {
          const CVec& hk = ch.eves[static_cast<size_t>(k)][static_cast<size_t>(t)];
          double dk = sigma2 + ip2(hk, bt.w0);
          for (int j = 0; j < L; ++j)
            if (j != l) dk += ip2(hk, bt.w[static_cast<size_t>(j)]);
          rk = std::log2(1.0 + ip2(hk, bt.w[static_cast<size_t>(l)]) / dk);
        }
        rep.eve_rate[static_cast<size_t>(t)][static_cast<size_t>(k)][static_cast<size_t>(l)] = rk;
        worst_eve = std::max(worst_eve, rk);
      }
      const double rsec = std::max(0.0, rp - worst_eve);
      rep.secrecy_rate[static_cast<size_t>(t)][static_cast<size_t>(l)] = rsec;
      rep.mos[static_cast<size_t>(t)][static_cast<size_t>(l)] =
          rsec > 0.0 ? qoe.lambda1 * std::log(rsec) + lam_l : qoe.mos_floor;
      rep.mos_floored[static_cast<size_t>(t)][static_cast<size_t>(l)] = rsec <= 0.0;
      total += rep.mos[static_cast<size_t>(t)][static_cast<size_t>(l)];
    }
  }
  rep.sum_mos = total / T;
  (void)ra;
  return rep;
}

GridOracleResult grid_trajectory_oracle(const NetworkConfig& cfg, const ChannelParams& params,
                                        const QoEParams& qoe, const Geometry& geo,
                                        const std::vector<Beamformers>& bf,
                                        const std::vector<RateAllocation>& ra, int grid_points,
                                        double half_extent, unsigned long channel_seed) {
  const int T = cfg.num_slots;
  const int G = grid_points * grid_points;
  if (static_cast<long>(G) * T > 10'000'000L)
    throw std::invalid_argument("grid_trajectory_oracle: grid too large");
  const double step =
      grid_points > 1 ? 2.0 * half_extent / (grid_points - 1) : 0.0;

  std::vector<Vec2> pts(static_cast<size_t>(G));
  for (int i = 0; i < grid_points; ++i)
    for (int j = 0; j < grid_points; ++j)
      pts[static_cast<size_t>(i * grid_points + j)] =
          Vec2(-half_extent + i * step, -half_extent + j * step);

  // per-slot per-grid-point MOS contribution at fixed beamformers
  NetworkConfig one_slot_cfg = cfg;
  std::vector<std::vector<double>> score(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(G)));
  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < G; ++g) {
      std::vector<Vec2> traj = geo.trajectory;
      traj[static_cast<size_t>(t)] = pts[static_cast<size_t>(g)];
      const ChannelRealization ch = resample_at(params, geo, traj, one_slot_cfg, channel_seed);
      const MetricsReport rep = brute_force_rates(ch, bf, ra, cfg, params, qoe, true);
      double s = 0.0;
      for (double m : rep.mos[static_cast<size_t>(t)]) s += m;
      score[static_cast<size_t>(t)][static_cast<size_t>(g)] = s / T;
    }
  }

  const double D = cfg.step_bound();
  const double d2 = D * D * (1.0 + 1e-12);
  constexpr double kNegInf = -1e300;

  // DP over slots. Slot 0 is pinned to q0 (nearest grid point must match it;
  // we allow q0 itself off-grid by treating slot 0 as a virtual state).
  std::vector<std::vector<double>> best(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(G), kNegInf));
  std::vector<std::vector<int>> from(static_cast<size_t>(T), std::vector<int>(static_cast<size_t>(G), -1));
  // slot 0 fixed at q0: score slot 0 with trajectory value q0
  std::vector<Vec2> traj0 = geo.trajectory;
  traj0[0] = cfg.q_start;
  const ChannelRealization ch0 = resample_at(params, geo, traj0, one_slot_cfg, channel_seed);
  const MetricsReport rep0 = brute_force_rates(ch0, bf, ra, cfg, params, qoe, true);
  double s0 = 0.0;
  for (double m : rep0.mos[0]) s0 += m;
  s0 /= T;

  for (int g = 0; g < G; ++g)
    if ((pts[static_cast<size_t>(g)] - cfg.q_start).squaredNorm() <= d2)
      best[1][static_cast<size_t>(g)] = s0 + score[1][static_cast<size_t>(g)];
  for (int t = 2; t < T; ++t)
    for (int g = 0; g < G; ++g) {
      double bv = kNegInf;
      int bi = -1;
      for (int p = 0; p < G; ++p) {
        if (best[static_cast<size_t>(t - 1)][static_cast<size_t>(p)] <= kNegInf) continue;
        if ((pts[static_cast<size_t>(g)] - pts[static_cast<size_t>(p)]).squaredNorm() > d2) continue;
        if (best[static_cast<size_t>(t - 1)][static_cast<size_t>(p)] > bv) {
          bv = best[static_cast<size_t>(t - 1)][static_cast<size_t>(p)];
          bi = p;
        }
      }
      if (bi >= 0) {
        best[static_cast<size_t>(t)][static_cast<size_t>(g)] = bv + score[static_cast<size_t>(t)][static_cast<size_t>(g)];
        from[static_cast<size_t>(t)][static_cast<size_t>(g)] = bi;
      }
    }

  GridOracleResult out;
  out.grid_step = step;
  double bv = kNegInf;
  int bg = -1;
  for (int g = 0; g < G; ++g) {
    if ((pts[static_cast<size_t>(g)] - cfg.q_final).squaredNorm() > d2) continue;
    if (best[static_cast<size_t>(T - 1)][static_cast<size_t>(g)] > bv) {
      bv = best[static_cast<size_t>(T - 1)][static_cast<size_t>(g)];
      bg = g;
    }
  }
  if (bg < 0) throw std::runtime_error("grid_trajectory_oracle: no kinematically feasible grid path");
  out.best_sum_mos = bv;
  out.best_path.assign(static_cast<size_t>(T), cfg.q_start);
  int cur = bg;
  for (int t = T - 1; t >= 1; --t) {
    out.best_path[static_cast<size_t>(t)] = pts[static_cast<size_t>(cur)];
    cur = from[static_cast<size_t>(t)][static_cast<size_t>(cur)];
    if (t == 1) break;
  }
  return out;
}

std::vector<CheckResult> run_all(std::ostream& os, long samples, unsigned long seed) {
  std::vector<CheckResult> results;
  results.push_back(check_hyperbolic_soc(samples, seed));
  results.push_back(check_taylor_bounds(samples, seed + 1));
  results.push_back(check_gram_sandwich(samples, seed + 2));
  results.push_back(check_trace_identity(std::min(samples, 1000L), seed + 3));
  for (const auto& r : results)
    os << r.name << " samples=" << r.samples << " worst=" << r.worst_violation << " "
       << (r.pass ? "PASS" : "FAIL") << "\n";
  return results;
}

}  // namespace uavrsma::oracle
