#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavrsma/bf_subproblem.hpp"
#include "uavrsma/channel.hpp"
#include "uavrsma/rates.hpp"
#include "uavrsma/traj_subproblem.hpp"
#include "uavrsma/types.hpp"

namespace uavrsma {

/// One completed outer iteration of the alternating loop.
struct OuterRecord {
  int outer_iter = 0;             // 1-based
  double sum_mos_after_bf = 0.0;  // incumbent after the beamforming step
  double sum_mos = 0.0;           // incumbent after the trajectory step
  int bf_inner_iters = 0;
  int traj_inner_iters = 0;
  bool bf_kept_incumbent = false;    // safeguard: subproblem result rejected
  bool traj_kept_incumbent = false;
  double wall_ms = 0.0;
};

/// Full state of an alternating-optimization run; self-contained, so a run
/// can be checkpointed and resumed without the original call context.
struct SolutionState {
  NetworkConfig cfg;
  QoEParams qoe;
  ChannelParams params;
  Geometry geo;  // geo.trajectory is the incumbent trajectory
  unsigned long seed = 0;

  std::vector<Beamformers> bf;      // per slot
  std::vector<RateAllocation> ra;   // per slot
  std::vector<BfAuxiliaries> aux;   // per slot, last beamforming step
  TrajSlacks slacks;                // last trajectory step
  double sum_mos = 0.0;             // true robust slot-averaged MOS sum
  double max_rank_one_gap = 0.0;    // worst beam gap of the last adopted beamforming step

  std::vector<OuterRecord> history;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct AoOptions {
  BfOptions bf;
  TrajOptions traj;
};

/// Alternates the beamforming and trajectory subproblems (in that order, from
/// matched-filter beams on the straight-line trajectory carried by geo) until
/// the sum-MOS change falls below cfg.conv_eps or cfg.max_outer_iters is hit.
/// Deterministic for a fixed seed. Subproblem initialization errors propagate
/// with the outer-iteration index attached.
SolutionState run_aom(const ChannelParams& params, const Geometry& geo, const NetworkConfig& cfg,
                      const QoEParams& qoe, unsigned long seed, const AoOptions& opts = {});

/// Continues the loop for at most extra_iters more outer iterations (or until
/// the tolerance is met again). extra_iters = 0 returns the state unchanged.
/// Throws std::runtime_error when the state is internally inconsistent.
SolutionState resume(SolutionState state, int extra_iters, const AoOptions& opts = {});

/// Versioned, exact-round-trip text snapshot of a SolutionState.
void save_checkpoint(const SolutionState& state, std::ostream& os);
SolutionState load_checkpoint(std::istream& is);

}  // namespace uavrsma
