#pragma once

#include <string>
#include <vector>

#include "uavrsma/channel.hpp"
#include "uavrsma/conic.hpp"
#include "uavrsma/rates.hpp"
#include "uavrsma/solver.hpp"
#include "uavrsma/types.hpp"

namespace uavrsma {

/// Epigraph scalars of the convexified per-slot beamforming problem.
/// c1/c2 bracket the user's total/interference log-powers, c3/c4 the
/// eavesdropper's; pi is the worst-eavesdropper rate bound; t and u are the
/// secrecy-rate and log-MOS epigraphs; c5/c6 back the common-rate split.
struct BfAuxiliaries {
  std::vector<double> c1, c2, t, u, pi, c5, c6;      // per user
  std::vector<std::vector<double>> c3, c4;           // [user][eve]
  double beta = 0.0;                                 // 2^eta
};

struct BfOptions {
  double inner_tol = 1e-5;
  int max_inner_iters = 8;
  double solver_tol = 1e-8;
  bool use_soc_secrecy = false;  // extra Gram-substituted SOC secrecy cut
  bool use_q_objective = false;  // alternative q-variable objective encoding
  bool solver_trace = false;     // per-iteration conic solver diagnostics on stderr
};

/// One slot of channel data in natural (watt) units.
struct BfSlotInputs {
  std::vector<CVec> h_users;     // L perfect user channels
  std::vector<CMat> gram_worst;  // K worst-case eavesdropper Grams
  std::vector<CMat> gram_best;   // K best-case eavesdropper Grams
  double sigma2 = 0.0;
};

struct BfSlotResult {
  Beamformers bf;
  RateAllocation ra;
  BfAuxiliaries aux;
  double surrogate_obj = 0.0;  // conic objective at the accepted iterate
  double slot_mos = 0.0;       // true robust MOS sum at the accepted iterate
  // worst relative Frobenius gap between the final step's rank-one surrogate
  // matrix and the recovered outer product, over all beams
  double rank_one_gap = 0.0;
  int inner_iters = 0;
  std::vector<std::string> warnings;
};

/// Affine minorant of the quadratic form w^H G w (G Hermitian PSD) at w_prev,
/// over the lifted real variables starting at w_base: 2 Re(w_prev^H G w) -
/// w_prev^H G w_prev. Exact at w = w_prev; this is the trace of G against the
/// rank-one surrogate w_prev w^H + w w_prev^H - w_prev w_prev^H.
conic::LinExpr rank_one_linearize(const CMat& G, const CVec& w_prev, int w_base);

/// Frobenius gap between the rank-one surrogate evaluated at w and the true
/// outer product w w^H; equals ||w - w_prev||^2.
double rank_one_gap(const CVec& w_prev, const CVec& w);

/// First-order Taylor lower bound on e^c at c_prev: e^{c_prev}(c - c_prev + 1).
conic::LinExpr exp_taylor_upper(int c_var, double c_prev);

/// SOC form of the hyperbolic secrecy cut: || (2 sqrt(beta/(beta-1)) tr,
/// lambda - upsilon) || <= lambda + upsilon. Throws for beta <= 1.
void soc_secrecy_block(conic::ConicProgram& prog, const conic::LinExpr& tr_cross,
                       const conic::LinExpr& lambda, const conic::LinExpr& upsilon, double beta);

/// Matched filters toward each user, total power 0.9 p_max split evenly.
Beamformers matched_filter_init(const std::vector<CVec>& h_users, double p_max);

/// Inner SCA loop for one slot at fixed trajectory. Throws std::runtime_error
/// when the very first convex restriction is infeasible; later failures return
/// the last accepted iterate with a warning.
BfSlotResult solve_bf_slot(const BfSlotInputs& in, const NetworkConfig& cfg,
                           const QoEParams& qoe, const Beamformers& init,
                           const BfOptions& opts = {});

struct BfSolveOutput {
  std::vector<Beamformers> bf;
  std::vector<RateAllocation> ra;
  std::vector<BfAuxiliaries> aux;
  double sum_mos = 0.0;            // slot-averaged true robust MOS sum
  double max_rank_one_gap = 0.0;   // worst slot's rank_one_gap
  int total_inner_iters = 0;
  std::vector<std::string> warnings;
};

/// All slots (independent problems) at a fixed trajectory's channels.
BfSolveOutput solve_bf(const ChannelRealization& ch, const NetworkConfig& cfg,
                       const QoEParams& qoe, const ChannelParams& params,
                       const std::vector<Beamformers>& init, const BfOptions& opts = {});

}  // namespace uavrsma
