#include "uavrsma/bf_subproblem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavrsma {

using conic::ConicProgram;
using conic::ConicSolution;
using conic::LinExpr;
using conic::SolverOptions;
using conic::SolveStatus;
using conic::to_string;

namespace {

const double kLn2 = std::log(2.0);

// lifted layout per beam: [Re w_0..Re w_{N-1}, Im w_0..Im w_{N-1}] at base
int re_idx(int base, int i) { return base + i; }
int im_idx(int base, int n_ant, int i) { return base + n_ant + i; }

// (Re h^H w, Im h^H w) as affine rows over the lifted beam at base
std::pair<LinExpr, LinExpr> inner_rows(const CVec& h, int base) {
  const int n = static_cast<int>(h.size());
  LinExpr re, im;
  for (int i = 0; i < n; ++i) {
    re.terms.emplace_back(re_idx(base, i), h[i].real());
    re.terms.emplace_back(im_idx(base, n, i), h[i].imag());
    im.terms.emplace_back(im_idx(base, n, i), h[i].real());
    im.terms.emplace_back(re_idx(base, i), -h[i].imag());
  }
  return {re, im};
}

// rows f_r with w^H G w = sum_r |f_r^H w|^2 (G Hermitian PSD)
std::vector<CVec> psd_factor_rows(const CMat& G) {
  Eigen::SelfAdjointEigenSolver<CMat> es(G);
  std::vector<CVec> rows;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 0.0) rows.push_back(std::sqrt(lam) * es.eigenvectors().col(i));
  }
  return rows;
}

// sum of |f^H w|^2 over `rows` plus constant k, bounded by affine t:
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

struct SlotScaled {
  std::vector<CVec> h;        // users, scaled
  std::vector<CMat> gw, gb;   // eavesdropper grams, scaled
  double sigma2 = 0.0;
};

SlotScaled scale_inputs(const BfSlotInputs& in, double p_max) {
  double unit = 0.0;
  for (const auto& h : in.h_users) unit = std::max(unit, h.squaredNorm());
  for (const auto& g : in.gram_worst) unit = std::max(unit, g.trace().real());
  unit *= std::max(p_max, 1e-12);
  if (unit <= 0.0) unit = 1.0;
  const double kappa = 1.0 / unit;
  SlotScaled s;
  for (const auto& h : in.h_users) s.h.push_back(std::sqrt(kappa) * h);
  for (const auto& g : in.gram_worst) s.gw.push_back(kappa * g);
  for (const auto& g : in.gram_best) s.gb.push_back(kappa * g);
  s.sigma2 = kappa * in.sigma2;
  return s;
}

double quad(const CMat& G, const CVec& w) { return w.dot(G * w).real(); }
double ip2(const CVec& h, const CVec& w) { return std::norm(h.dot(w)); }

// true robust per-slot metrics at a candidate point, in natural units
double slot_true_mos(const BfSlotInputs& in, const Beamformers& bf, const QoEParams& qoe) {
  const int L = static_cast<int>(in.h_users.size());
  const int K = static_cast<int>(in.gram_worst.size());
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    const double rp = private_rate(in.h_users[static_cast<size_t>(l)], bf, l, in.sigma2);
    std::vector<double> row(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k)
      row[static_cast<size_t>(k)] = eve_rate_robust(in.gram_worst[static_cast<size_t>(k)],
                                                    in.gram_best[static_cast<size_t>(k)], bf, l,
                                                    in.sigma2);
    total += mos(secrecy_rate(0.0, rp, row), qoe);
  }
  return total;
}

double min_surrogate_secrecy(const BfSlotInputs& in, const Beamformers& bf) {
  const int L = static_cast<int>(in.h_users.size());
  const int K = static_cast<int>(in.gram_worst.size());
  double worst = std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l) {
    const double rp = private_rate(in.h_users[static_cast<size_t>(l)], bf, l, in.sigma2);
    double re = 0.0;
    for (int k = 0; k < K; ++k)
      re = std::max(re, eve_rate_robust(in.gram_worst[static_cast<size_t>(k)],
                                        in.gram_best[static_cast<size_t>(k)], bf, l, in.sigma2));
    worst = std::min(worst, rp - re);
  }
  return worst;
}

}  // namespace

LinExpr rank_one_linearize(const CMat& G, const CVec& w_prev, int w_base) {
  const int n = static_cast<int>(w_prev.size());
  const CVec v = G * w_prev;
  LinExpr e;
  e.constant = -w_prev.dot(v).real();
  for (int i = 0; i < n; ++i) {
    e.terms.emplace_back(re_idx(w_base, i), 2.0 * v[i].real());
    e.terms.emplace_back(im_idx(w_base, n, i), 2.0 * v[i].imag());
  }
  return e;
}

double rank_one_gap(const CVec& w_prev, const CVec& w) {
  // (w_prev w^H + w w_prev^H - w_prev w_prev^H) - w w^H = -(w - w_prev)(w - w_prev)^H
  return (w - w_prev).squaredNorm();
}

LinExpr exp_taylor_upper(int c_var, double c_prev) {
  const double e = std::exp(c_prev);
  return e * LinExpr::var(c_var) + LinExpr(e * (1.0 - c_prev));
}

void soc_secrecy_block(ConicProgram& prog, const LinExpr& tr_cross, const LinExpr& lambda,
                       const LinExpr& upsilon, double beta) {
  if (beta <= 1.0) throw std::domain_error("soc_secrecy_block: beta must exceed 1");
  const double f = std::sqrt(beta / (beta - 1.0));
  prog.add_soc({lambda + upsilon, 2.0 * f * tr_cross, lambda - upsilon}, "secrecy-soc");
}

Beamformers matched_filter_init(const std::vector<CVec>& h_users, double p_max) {
  const int L = static_cast<int>(h_users.size());
  const int N = L > 0 ? static_cast<int>(h_users[0].size()) : 0;
  const double per_beam = std::sqrt(std::max(0.0, 0.9 * p_max) / (L + 1));
  Beamformers bf;
  int strongest = 0;
  for (int l = 1; l < L; ++l)
    if (h_users[static_cast<size_t>(l)].norm() > h_users[static_cast<size_t>(strongest)].norm())
      strongest = l;
  auto unit = [&](int l) -> CVec {
    const CVec& h = h_users[static_cast<size_t>(l)];
    return h.norm() > 0.0 ? CVec(h / h.norm()) : CVec(CVec::Zero(N));
  };
  bf.w0 = per_beam * unit(strongest);
  for (int l = 0; l < L; ++l) bf.w.push_back(per_beam * unit(l));
  return bf;
}

BfSlotResult solve_bf_slot(const BfSlotInputs& in, const NetworkConfig& cfg, const QoEParams& qoe,
                           const Beamformers& init, const BfOptions& opts) {
  const int L = static_cast<int>(in.h_users.size());
  const int K = static_cast<int>(in.gram_worst.size());
  const int N = static_cast<int>(in.h_users.at(0).size());
  const double p_max = cfg.p_max_watt;

  BfSlotResult out;
  double eta = cfg.eta;
  if (eta <= 0.0) {
    eta = 1e-3;
    out.warnings.push_back("eta <= 0 bumped to 1e-3");
  }
  const double beta = std::exp2(eta);

  Beamformers cur = init;
  // degenerate expansion points collapse the linearization; re-aim such beams
  {
    const Beamformers mf = matched_filter_init(in.h_users, p_max);
    bool fixed = false;
    auto guard = [&](CVec& w, const CVec& mfw) {
      if (w.norm() < 1e-9 * std::sqrt(std::max(p_max, 1e-30))) {
        w = mfw;
        fixed = true;
      }
    };
    guard(cur.w0, mf.w0);
    for (int l = 0; l < L; ++l) guard(cur.w[static_cast<size_t>(l)], mf.w[static_cast<size_t>(l)]);
    if (fixed) {
      const double tp = cur.total_power();
      if (tp > p_max) {
        const double s = std::sqrt(0.95 * p_max / tp);
        cur.w0 *= s;
        for (auto& w : cur.w) w *= s;
      }
      out.warnings.push_back("re-aimed degenerate zero expansion beam");
    }
  }

  const SlotScaled sc = scale_inputs(in, p_max);
  const bool anneal = min_surrogate_secrecy(in, cur) < eta;

  // gram factors are iteration-invariant
  std::vector<std::vector<CVec>> gw_rows, gb_rows;
  for (int k = 0; k < K; ++k) {
    gw_rows.push_back(psd_factor_rows(sc.gw[static_cast<size_t>(k)]));
    gb_rows.push_back(psd_factor_rows(sc.gb[static_cast<size_t>(k)]));
  }

  double prev_obj = -std::numeric_limits<double>::infinity();
  RateAllocation cur_ra{std::vector<double>(static_cast<size_t>(L), 0.0)};
  BfAuxiliaries aux;
  aux.beta = beta;

  for (int it = 0; it < opts.max_inner_iters; ++it) {
    const double eta_eff = anneal ? eta * std::min(1.0, (it + 1) / 3.0) : eta;

    ConicProgram prog;
    const int vw = prog.add_vars(2 * N * (L + 1));
    auto beam_base = [&](int j) { return vw + 2 * N * j; };  // j=0 common, j=1.. private
    const int va = prog.add_vars(L);
    const int vc1 = prog.add_vars(L), vc2 = prog.add_vars(L);
    const int vpi = prog.add_vars(L), vt = prog.add_vars(L), vu = prog.add_vars(L);
    const int vc5 = prog.add_vars(L), vc6 = prog.add_vars(L);
    const int vc3 = prog.add_vars(L * K), vc4 = prog.add_vars(L * K);
    const int vq = opts.use_q_objective ? prog.add_vars(L) : -1;

    // power budget, exact
    {
      std::vector<LinExpr> soc;
      soc.push_back(LinExpr(std::sqrt(p_max)));
      for (int j = 0; j <= L; ++j)
        for (int r = 0; r < 2 * N; ++r) soc.push_back(LinExpr::var(beam_base(j) + r));
      prog.add_soc(std::move(soc), "power");
    }

    // expansion-point logs (exact, so every Taylor bound is tight at cur)
    auto wtau = [&](int j) -> const CVec& {
      return j == 0 ? cur.w0 : cur.w[static_cast<size_t>(j - 1)];
    };

    for (int l = 0; l < L; ++l) {
      const CVec& h = sc.h[static_cast<size_t>(l)];
      const CMat H = h * h.adjoint();

      // e^{c1} <= linearized(S_l + I_l) + sigma2
      LinExpr z1(sc.sigma2);
      for (int j = 1; j <= L; ++j) z1 += rank_one_linearize(H, wtau(j), beam_base(j));
      prog.add_exp(LinExpr::var(vc1 + l), LinExpr(1.0), z1, "c1");

      // I_l + sigma2 <= taylor(c2)
      double i_tau = 0.0;
      std::vector<LinExpr> rows2;
      for (int j = 1; j <= L; ++j) {
        if (j - 1 == l) continue;
        i_tau += ip2(h, wtau(j));
        auto [re, im] = inner_rows(h, beam_base(j));
        rows2.push_back(re);
        rows2.push_back(im);
      }
      const double c2_tau = std::log(i_tau + sc.sigma2);
      add_quad_le(prog, rows2, sc.sigma2, exp_taylor_upper(vc2 + l, c2_tau), "c2");

      // secrecy epigraph and threshold
      const LinExpr rate =
          (1.0 / kLn2) * (LinExpr::var(vc1 + l) - LinExpr::var(vc2 + l)) - LinExpr::var(vpi + l);
      prog.add_nonneg(rate - LinExpr::var(vt + l), "t-epigraph");
      prog.add_nonneg(rate - LinExpr(eta_eff), "eta");

      // u <= ln t (or the q-variable detour: q^2 <= t, e^{u/2} <= q)
      if (opts.use_q_objective) {
        prog.add_soc({0.5 * (LinExpr::var(vt + l) + LinExpr(1.0)), LinExpr::var(vq + l),
                      0.5 * (LinExpr::var(vt + l) - LinExpr(1.0))},
                     "q-soc");
        prog.add_exp(0.5 * LinExpr::var(vu + l), LinExpr(1.0), LinExpr::var(vq + l), "u-q");
      } else {
        prog.add_exp(LinExpr::var(vu + l), LinExpr(1.0), LinExpr::var(vt + l), "u");
      }
      prog.add_objective(vu + l, qoe.lambda1);

      // common-rate epigraph: e^{c5} <= lin(total), denominator <= taylor(c6)
      LinExpr z5 = rank_one_linearize(H, wtau(0), beam_base(0)) + LinExpr(sc.sigma2);
      double d_tau = sc.sigma2;
      std::vector<LinExpr> rows6;
      for (int j = 1; j <= L; ++j) {
        z5 += rank_one_linearize(H, wtau(j), beam_base(j));
        d_tau += ip2(h, wtau(j));
        auto [re, im] = inner_rows(h, beam_base(j));
        rows6.push_back(re);
        rows6.push_back(im);
      }
      prog.add_exp(LinExpr::var(vc5 + l), LinExpr(1.0), z5, "c5");
      add_quad_le(prog, rows6, sc.sigma2, exp_taylor_upper(vc6 + l, std::log(d_tau)), "c6");
      LinExpr asum;
      for (int j = 0; j < L; ++j) asum += LinExpr::var(va + j);
      prog.add_nonneg((1.0 / kLn2) * (LinExpr::var(vc5 + l) - LinExpr::var(vc6 + l)) - asum,
                      "common-rate");
      prog.add_nonneg(LinExpr::var(va + l), "a-nonneg");

      // eavesdropper pair epigraphs
      for (int k = 0; k < K; ++k) {
        const int pk = l * K + k;
        // numerator: S^wc(w_l) + I^bc(others) + sigma2 <= taylor(c3)
        std::vector<LinExpr> rows3;
        for (const auto& f : gw_rows[static_cast<size_t>(k)]) {
          auto [re, im] = inner_rows(f, beam_base(l + 1));
          rows3.push_back(re);
          rows3.push_back(im);
        }
        double n_tau = quad(sc.gw[static_cast<size_t>(k)], wtau(l + 1)) + sc.sigma2;
        LinExpr z4(sc.sigma2);
        double d4_tau = sc.sigma2;
        for (int j = 0; j <= L; ++j) {
          if (j == l + 1) continue;
          for (const auto& f : gb_rows[static_cast<size_t>(k)]) {
            auto [re, im] = inner_rows(f, beam_base(j));
            rows3.push_back(re);
            rows3.push_back(im);
          }
          n_tau += quad(sc.gb[static_cast<size_t>(k)], wtau(j));
          z4 += rank_one_linearize(sc.gb[static_cast<size_t>(k)], wtau(j), beam_base(j));
          d4_tau += quad(sc.gb[static_cast<size_t>(k)], wtau(j));
        }
        add_quad_le(prog, rows3, sc.sigma2, exp_taylor_upper(vc3 + pk, std::log(n_tau)), "c3");
        prog.add_exp(LinExpr::var(vc4 + pk), LinExpr(1.0), z4, "c4");
        prog.add_nonneg(LinExpr::var(vpi + l) -
                            (1.0 / kLn2) * (LinExpr::var(vc3 + pk) - LinExpr::var(vc4 + pk)),
                        "pi");
        (void)d4_tau;

        if (opts.use_soc_secrecy) {
          // Gram-substituted hyperbolic cut on the linearized quantities
          const CMat cross =
              sc.h[static_cast<size_t>(l)] * sc.h[static_cast<size_t>(l)].adjoint();
          const LinExpr s_l = rank_one_linearize(cross, wtau(l + 1), beam_base(l + 1));
          LinExpr i_l(0.0);
          for (int j = 1; j <= L; ++j)
            if (j != l + 1) i_l += rank_one_linearize(cross, wtau(j), beam_base(j));
          const LinExpr ups = s_l - (beta - 1.0) * i_l;
          LinExpr lam = rank_one_linearize(sc.gw[static_cast<size_t>(k)], wtau(l + 1),
                                           beam_base(l + 1));
          lam = (beta / (beta - 1.0)) * lam;
          for (int j = 1; j <= L; ++j)
            if (j != l + 1)
              lam += rank_one_linearize(sc.gb[static_cast<size_t>(k)], wtau(j), beam_base(j));
          const auto [re_c, im_c] =
              inner_rows(sc.h[static_cast<size_t>(l)], beam_base(l + 1));
          soc_secrecy_block(prog, re_c, lam, ups, beta);
          (void)im_c;
        }
      }
    }

    SolverOptions sopts;
    sopts.tol = opts.solver_tol;
    sopts.trace = opts.solver_trace;
    const ConicSolution sol = solve(prog, sopts);
    if (sol.status != SolveStatus::Optimal) {
      if (it == 0)
        throw std::runtime_error("solve_bf_slot: convex restriction " +
                                 std::string(to_string(sol.status)) +
                                 " at the initialization point");
      out.warnings.push_back("inner iteration " + std::to_string(it) + " returned " +
                             to_string(sol.status) + "; keeping last iterate");
      break;
    }

    // extract the new iterate
    Beamformers next;
    auto take_beam = [&](int j) {
      CVec w(N);
      for (int i = 0; i < N; ++i)
        w[i] = std::complex<double>(sol.x[re_idx(beam_base(j), i)],
                                    sol.x[im_idx(beam_base(j), N, i)]);
      return w;
    };
    next.w0 = take_beam(0);
    for (int l = 0; l < L; ++l) next.w.push_back(take_beam(l + 1));
    const double tp = next.total_power();
    if (tp > p_max) {
      const double s = std::sqrt(p_max / tp);
      next.w0 *= s;
      for (auto& w : next.w) w *= s;
    }
    RateAllocation ra{std::vector<double>(static_cast<size_t>(L), 0.0)};
    for (int l = 0; l < L; ++l) ra.a[static_cast<size_t>(l)] = std::max(0.0, sol.x[va + l]);

    aux.c1.assign(static_cast<size_t>(L), 0.0);
    aux.c2 = aux.t = aux.u = aux.pi = aux.c5 = aux.c6 = aux.c1;
    aux.c3.assign(static_cast<size_t>(L), std::vector<double>(static_cast<size_t>(K), 0.0));
    aux.c4 = aux.c3;
    for (int l = 0; l < L; ++l) {
      aux.c1[static_cast<size_t>(l)] = sol.x[vc1 + l];
      aux.c2[static_cast<size_t>(l)] = sol.x[vc2 + l];
      aux.t[static_cast<size_t>(l)] = sol.x[vt + l];
      aux.u[static_cast<size_t>(l)] = sol.x[vu + l];
      aux.pi[static_cast<size_t>(l)] = sol.x[vpi + l];
      aux.c5[static_cast<size_t>(l)] = sol.x[vc5 + l];
      aux.c6[static_cast<size_t>(l)] = sol.x[vc6 + l];
      for (int k = 0; k < K; ++k) {
        aux.c3[static_cast<size_t>(l)][static_cast<size_t>(k)] = sol.x[vc3 + l * K + k];
        aux.c4[static_cast<size_t>(l)][static_cast<size_t>(k)] = sol.x[vc4 + l * K + k];
      }
    }

    {
      // relative Frobenius distance between the accepted step's rank-one
      // surrogate matrix and the recovered outer product, worst beam
      auto gap_ratio = [](const CVec& wp, const CVec& wn) {
        const CMat surrogate =
            wp * wn.adjoint() + wn * wp.adjoint() - wp * wp.adjoint();
        return (surrogate - wn * wn.adjoint()).norm() / std::max(1.0, surrogate.norm());
      };
      double g = gap_ratio(cur.w0, next.w0);
      for (int l = 0; l < L; ++l)
        g = std::max(g, gap_ratio(cur.w[static_cast<size_t>(l)], next.w[static_cast<size_t>(l)]));
      out.rank_one_gap = g;
    }
    cur = next;
    cur_ra = ra;
    out.inner_iters = it + 1;
    const bool annealing_done = !anneal || eta_eff >= eta;
    if (annealing_done && it > 0 && sol.obj - prev_obj < opts.inner_tol) {
      prev_obj = sol.obj;
      break;
    }
    prev_obj = sol.obj;
  }

  // keep the common-rate split consistent with the true common rate
  {
    const double r0 = common_rate(in.h_users, cur, in.sigma2);
    double asum = 0.0;
    for (double v : cur_ra.a) asum += v;
    if (asum > r0 && asum > 0.0) {
      const double s = std::max(0.0, r0) / asum;
      for (auto& v : cur_ra.a) v *= s;
      if (asum > r0 + 1e-6) out.warnings.push_back("rate split clamped to the common rate");
    }
  }

  out.bf = cur;
  out.ra = cur_ra;
  out.aux = aux;
  out.surrogate_obj = prev_obj;
  out.slot_mos = slot_true_mos(in, cur, qoe);
  return out;
}

BfSolveOutput solve_bf(const ChannelRealization& ch, const NetworkConfig& cfg,
                       const QoEParams& qoe, const ChannelParams& params,
                       const std::vector<Beamformers>& init, const BfOptions& opts) {
  const int T = cfg.num_slots;
  const int L = cfg.num_users;
  const int K = cfg.num_eves;
  if (static_cast<int>(init.size()) != T)
    throw std::invalid_argument("solve_bf: init must carry one beamformer set per slot");

  BfSolveOutput out;
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    BfSlotInputs in;
    in.sigma2 = params.noise_power;
    for (int l = 0; l < L; ++l) in.h_users.push_back(ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)]);
    for (int k = 0; k < K; ++k) {
      in.gram_worst.push_back(ch.gram_worst[static_cast<size_t>(k)][static_cast<size_t>(t)]);
      in.gram_best.push_back(ch.gram_best[static_cast<size_t>(k)][static_cast<size_t>(t)]);
    }
    BfSlotResult r;
    try {
      r = solve_bf_slot(in, cfg, qoe, init[static_cast<size_t>(t)], opts);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("slot " + std::to_string(t) + ": " + e.what());
    }
    total += r.slot_mos;
    out.max_rank_one_gap = std::max(out.max_rank_one_gap, r.rank_one_gap);
    out.total_inner_iters += r.inner_iters;
    for (const auto& w : r.warnings) out.warnings.push_back("slot " + std::to_string(t) + ": " + w);
    out.bf.push_back(std::move(r.bf));
    out.ra.push_back(std::move(r.ra));
    out.aux.push_back(std::move(r.aux));
  }
  out.sum_mos = total / T;
  return out;
}

}  // namespace uavrsma
