#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavrsma/channel.hpp"
#include "uavrsma/rates.hpp"

namespace uavrsma::oracle {

/// One validator outcome: sample count and the worst violation observed.
struct CheckResult {
  std::string name;
  long samples = 0;
  double worst_violation = 0.0;
  bool pass = false;
};

/// SOC form of the hyperbolic secrecy constraint agrees with the hyperbola on
/// random (Lambda, Upsilon, Tr, beta) draws; exact logical agreement required.
CheckResult check_hyperbolic_soc(long samples, unsigned long seed);

/// Tangent/minorant bounds used by both SCA subproblems: exp Taylor, squared
/// quadratic lower bound, tangent of x^(-4/alpha), affine minorant of log2(1+x).
CheckResult check_taylor_bounds(long samples, unsigned long seed);

/// Gram sandwich over random error draws in the eps ball:
///   Tr((hh^H - upsilon I) W) <= Tr((h+e)(h+e)^H W) <= Tr(gram_worst W).
/// The lower matrix is the pre-floor bound; the PSD floor applied by
/// gram_bounds only raises it, so it is checked separately (floor >= raw).
CheckResult check_gram_sandwich(long samples, unsigned long seed);

/// Trace-form vs inner-product rate identity |h^H w|^2 = Tr(h h^H w w^H).
CheckResult check_trace_identity(long samples, unsigned long seed);

/// Independent recomputation of every closed-form metric straight from inner
/// products; shares no code with the rates module.
MetricsReport brute_force_rates(const ChannelRealization& ch, const std::vector<Beamformers>& bf,
                                const std::vector<RateAllocation>& ra, const NetworkConfig& cfg,
                                const ChannelParams& params, const QoEParams& qoe, bool robust = true);

/// Exhaustive dynamic-programming trajectory search on a square grid; scores
/// with the true nonconvex sum MOS at fixed beamformers. Throws when the grid
/// exceeds 1e7 states.
struct GridOracleResult {
  double best_sum_mos = 0.0;
  std::vector<Vec2> best_path;
  double grid_step = 0.0;
};
GridOracleResult grid_trajectory_oracle(const NetworkConfig& cfg, const ChannelParams& params,
                                        const QoEParams& qoe, const Geometry& geo,
                                        const std::vector<Beamformers>& bf,
                                        const std::vector<RateAllocation>& ra, int grid_points,
                                        double half_extent, unsigned long channel_seed);

/// Runs the full validator suite and writes one line per check.
std::vector<CheckResult> run_all(std::ostream& os, long samples, unsigned long seed);

}  // namespace uavrsma::oracle
