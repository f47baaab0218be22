#pragma once

#include <vector>

#include "uavrsma/channel.hpp"
#include "uavrsma/types.hpp"

namespace uavrsma {

/// Per-slot precoders: one common beam and one private beam per user.
struct Beamformers {
  CVec w0;
  std::vector<CVec> w;

  double total_power() const {
    double p = w0.squaredNorm();
    for (const auto& wl : w) p += wl.squaredNorm();
    return p;
  }
};

/// Per-slot common-rate split a_l (bit/s/Hz, nonnegative).
struct RateAllocation {
  std::vector<double> a;
  double sum() const {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
  }
};

struct MetricsReport {
  std::vector<double> common_rate;                // per slot
  std::vector<std::vector<double>> private_rate;  // [t][l]
  std::vector<std::vector<std::vector<double>>> eve_rate;  // [t][k][l]
  std::vector<std::vector<double>> secrecy_rate;  // [t][l]
  std::vector<std::vector<double>> mos;           // [t][l]
  std::vector<std::vector<bool>> mos_floored;     // [t][l]
  double sum_mos = 0.0;                           // slot-averaged sum over users
};

/// Eq.-(3) style common rate: min over users of the common-stream SINR rate.
/// The denominator sums over all L private beams.
double common_rate(const std::vector<CVec>& h_users, const Beamformers& bf, double sigma2);

/// Private-stream rate of user l; the common beam is decoded and removed first.
double private_rate(const CVec& h_l, const Beamformers& bf, int l, double sigma2);

/// Rate at which an eavesdropper with channel h_k decodes user l's private
/// stream; the common beam stays in the interference.
double eve_rate(const CVec& h_k, const Beamformers& bf, int l, double sigma2);

/// Worst-case eavesdropper rate from the Gram bounds: numerator uses
/// gram_worst, interference uses gram_best.
double eve_rate_robust(const CMat& gram_worst, const CMat& gram_best, const Beamformers& bf,
                       int l, double sigma2);

/// Positive part of (a + R_priv) - max_k (a + R_eve); a cancels algebraically.
double secrecy_rate(double a_l, double r_priv, const std::vector<double>& r_eve_row);

/// MOS of one user; returns qoe.mos_floor (flag set by callers) when r_sec <= 0.
double mos(double r_sec, const QoEParams& qoe);

/// Full per-slot metric evaluation. When `robust` is set the eavesdropper
/// rates use the worst-case Gram bounds.
MetricsReport evaluate_all(const ChannelRealization& ch, const std::vector<Beamformers>& bf,
                           const std::vector<RateAllocation>& ra, const NetworkConfig& cfg,
                           const ChannelParams& params, const QoEParams& qoe, bool robust = true);

}  // namespace uavrsma
