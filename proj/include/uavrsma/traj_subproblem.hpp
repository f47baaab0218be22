#pragma once

#include <string>
#include <vector>

#include "uavrsma/channel.hpp"
#include "uavrsma/conic.hpp"
#include "uavrsma/rates.hpp"
#include "uavrsma/types.hpp"

namespace uavrsma {

/// Slack variables of the convexified trajectory problem, reported in natural
/// units at the accepted trajectory: a/b bracket the user/eavesdropper
/// distance gains d^{-alpha/2} from below/above; the r_* slacks carry the
/// noise-normalized received powers entering the surrogate secrecy rate.
struct TrajSlacks {
  std::vector<std::vector<double>> a;     // [l][t], lower slack on user gain
  std::vector<std::vector<double>> b;     // [k][t], upper slack on eve gain
  std::vector<std::vector<double>> r_ll;  // [l][t], user total power / sigma^2
  std::vector<std::vector<double>> r_lj;  // [l][t], user interference / sigma^2
  std::vector<std::vector<std::vector<double>>> r_kk;  // [l][k][t], eve total
  std::vector<std::vector<std::vector<double>>> r_kj;  // [l][k][t], eve interf.

  /// Expansion point of the last accepted convex restriction.
  struct TaylorPoints {
    std::vector<Vec2> trajectory;
    std::vector<std::vector<double>> a;  // [l][t]
    std::vector<std::vector<double>> b;  // [k][t]
  } taylor;
};

struct TrajOptions {
  double inner_tol = 1e-5;
  int max_inner_iters = 5;
  double solver_tol = 1e-8;
  /// Candidate trajectories whose worst per-(slot, user) robust secrecy rate
  /// falls below min(min_secrecy, incumbent floor) are rejected, so callers
  /// that hand in a secrecy-feasible incumbent keep it feasible. The default
  /// disables the guard.
  double min_secrecy = -1e300;
};

struct TrajResult {
  std::vector<Vec2> trajectory;
  TrajSlacks slacks;
  double sum_mos = 0.0;        // true robust slot-averaged MOS at the result
  double surrogate_obj = 0.0;  // surrogate in the same units
  int inner_iters = 0;
  std::vector<std::string> warnings;
};

/// Global affine lower bound on x^2 with tangency at x_prev: 2 x_prev x - x_prev^2.
conic::LinExpr quadratic_lower_block(int x_var, double x_prev);

/// Restriction of "gain >= a": ||q - p||^2 + z^2 <= tangent of a^{-4/alpha}.
/// The position variables (qx, qy) and the constraint are scaled by
/// length_scale; a_hat_var holds a / a_prev so the tangent sits at 1.
/// Throws std::domain_error for a_prev <= 0 or alpha <= 2.
void distance_gain_user_block(conic::ConicProgram& prog, int qx, int qy, const Vec2& q_prev,
                              const Vec2& node_pos, int a_hat_var, double a_prev, double alpha,
                              double altitude, double length_scale);

/// Restriction of "gain <= b": b^{-4/alpha} bounded by the affine minorant of
/// the squared distance at q_prev, encoded with two exponential cones (no
/// power cone needed). b_hat_var holds b / b_prev. Throws std::domain_error
/// for b_prev <= 0 or alpha <= 2.
void distance_gain_eve_block(conic::ConicProgram& prog, int qx, int qy, const Vec2& q_prev,
                             const Vec2& node_pos, int b_hat_var, double b_prev, double alpha,
                             double altitude, double length_scale);

/// Movement constraints: q[0] pinned to q_start, per-step and terminal
/// displacements bounded by cfg.step_bound(). Positions scaled by length_scale.
void kinematics_block(conic::ConicProgram& prog, int q_base, const NetworkConfig& cfg,
                      double length_scale);

/// Exact surrogate secrecy rate (bit/s/Hz) in the slack variables:
/// log2(1+r_ll) - log2(1+r_lj) - log2(1+r_kk) + log2(1+r_kj).
double rtilde_exact(double r_ll, double r_lj, double r_kk, double r_kj);

/// Same with the two subtracted logs replaced by their tangents at the
/// previous iterate; a global minorant of rtilde_exact with equality at the
/// expansion point.
double rtilde_surrogate(double r_ll, double r_lj, double r_kk, double r_kj, double r_lj_tau,
                        double r_kk_tau);

/// Returns the empty string when geo.trajectory satisfies the kinematics, or
/// a description of the first violated constraint.
std::string check_kinematics(const std::vector<Vec2>& trajectory, const NetworkConfig& cfg,
                             double tol = 1e-9);

/// Inner SCA loop over the trajectory at fixed beamformers and rate split.
/// Small-scale fading is tied to `seed`, so re-synthesizing the channels at a
/// moved trajectory keeps the same fading draws. Iterates are accepted only
/// when the true robust sum MOS does not decrease, so the returned value is
/// never below the initial trajectory's by more than 1e-6. Throws
/// std::runtime_error when the initial trajectory violates the kinematics
/// (naming the constraint) or the first restriction fails to solve.
TrajResult solve_traj(const ChannelParams& params, const Geometry& geo, const NetworkConfig& cfg,
                      const QoEParams& qoe, unsigned long seed,
                      const std::vector<Beamformers>& bf, const std::vector<RateAllocation>& ra,
                      const TrajOptions& opts = {});

}  // namespace uavrsma
