#pragma once

#include <vector>

#include "uavrsma/types.hpp"

namespace uavrsma {

/// Per-slot channels for every node plus the eavesdropper uncertainty model.
/// h[node][t] are the true coefficients; for eavesdroppers h_tilde is the
/// estimate (true channel plus a norm-bounded error) and gram_worst/gram_best
/// bracket (h_tilde + e)(h_tilde + e)^H over the error ball.
struct ChannelRealization {
  std::vector<std::vector<CVec>> users;      // L x T, each N-vector
  std::vector<std::vector<CVec>> eves;       // K x T, true channels
  std::vector<std::vector<CVec>> eves_est;   // K x T, estimated channels h_tilde
  std::vector<std::vector<double>> upsilon;  // K x T, trace-bound radius
  std::vector<std::vector<CMat>> gram_worst; // K x T
  std::vector<std::vector<CMat>> gram_best;  // K x T
};

/// upsilon = eps^2 + 2 eps ||h_tilde||. Throws on negative eps.
double uncertainty_radius(const CVec& h_tilde, double csi_eps);

/// gram_worst = h h^H + upsilon I; gram_best = PSD floor of h h^H - upsilon I.
std::pair<CMat, CMat> gram_bounds(const CVec& h_tilde, double upsilon);

/// Rician channel synthesis per slot, deterministic in the seed. Log-normal
/// shadowing is drawn once per node and held across slots; the LoS component
/// is a half-wavelength ULA steering vector toward the node.
ChannelRealization sample_channel(const ChannelParams& params, const Geometry& geo,
                                  const NetworkConfig& cfg, unsigned long seed);

/// Recomputes the channel at a new trajectory with the same seed (same
/// small-scale fading and shadowing draws, new geometry factors).
ChannelRealization resample_at(const ChannelParams& params, Geometry geo,
                               const std::vector<Vec2>& trajectory, const NetworkConfig& cfg,
                               unsigned long seed);

/// CSV dump (node_id, slot, antenna, re, im) for reproducibility audits.
void dump_channel_csv(const ChannelRealization& ch, std::ostream& os);

}  // namespace uavrsma
