#include "uavrsma/channel.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace uavrsma {

namespace {

constexpr double kPi = 3.14159265358979323846;

// One RNG stream per (seed, node) so draws are independent of the trajectory
// and of how many other nodes exist.
std::mt19937_64 node_rng(unsigned long seed, NodeKind kind, int index) {
  std::seed_seq seq{seed, static_cast<unsigned long>(kind == NodeKind::User ? 1 : 2),
                    static_cast<unsigned long>(index)};
  return std::mt19937_64(seq);
}

CVec steering_vector(int n_antennas, const Vec2& uav, double altitude, const Vec2& node) {
  // half-wavelength ULA along the x axis; phase uses the direction cosine
  const double dx = node.x() - uav.x();
  const double d = std::sqrt((node - uav).squaredNorm() + altitude * altitude);
  const double cos_theta = dx / d;
  CVec a(n_antennas);
  for (int n = 0; n < n_antennas; ++n)
    a[n] = std::polar(1.0, -kPi * n * cos_theta);
  return a;
}

}  // namespace

double uncertainty_radius(const CVec& h_tilde, double csi_eps) {
  if (csi_eps < 0.0) throw std::domain_error("uncertainty_radius: csi_eps must be nonnegative");
  return csi_eps * csi_eps + 2.0 * csi_eps * h_tilde.norm();
}

std::pair<CMat, CMat> gram_bounds(const CVec& h_tilde, double upsilon) {
  if (upsilon < 0.0) throw std::domain_error("gram_bounds: upsilon must be nonnegative");
  const Eigen::Index n = h_tilde.size();
  const CMat outer = h_tilde * h_tilde.adjoint();
  CMat worst = outer + upsilon * CMat::Identity(n, n);
  CMat best = outer - upsilon * CMat::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<CMat> eig(best);
  Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
  best = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().adjoint();
  return {worst, best};
}

ChannelRealization sample_channel(const ChannelParams& params, const Geometry& geo,
                                  const NetworkConfig& cfg, unsigned long seed) {
  const int N = cfg.num_antennas;
  const int T = static_cast<int>(geo.trajectory.size());
  const int L = static_cast<int>(geo.user_positions.size());
  const int K = static_cast<int>(geo.eve_positions.size());
  if (T < 1) throw std::invalid_argument("sample_channel: empty trajectory");

  ChannelRealization out;
  out.users.assign(static_cast<size_t>(L), std::vector<CVec>(static_cast<size_t>(T)));
  out.eves.assign(static_cast<size_t>(K), std::vector<CVec>(static_cast<size_t>(T)));
  out.eves_est = out.eves;
  out.upsilon.assign(static_cast<size_t>(K), std::vector<double>(static_cast<size_t>(T), 0.0));
  out.gram_worst.assign(static_cast<size_t>(K), std::vector<CMat>(static_cast<size_t>(T)));
  out.gram_best = out.gram_worst;

  const double gamma = params.rician;
  const double los_w = std::sqrt(params.pl_los * gamma / (1.0 + gamma));
  const double nlos_w = std::sqrt(params.pl_nlos / (1.0 + gamma));

  auto synth = [&](NodeKind kind, int idx, const Vec2& pos, std::vector<CVec>& dst) {
    auto rng = node_rng(seed, kind, idx);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // log-normal shadowing, one draw per node per realization, constant in t
    const double shadow_db = params.shadowing_sigma_db * gauss(rng);
    const double shadow = std::pow(10.0, shadow_db / 20.0);  // amplitude factor
    for (int t = 0; t < T; ++t) {
      const Vec2& q = geo.trajectory[static_cast<size_t>(t)];
      const double d = std::sqrt((q - pos).squaredNorm() + cfg.uav_altitude * cfg.uav_altitude);
      const double dist_amp = std::pow(d, -params.alpha / 2.0);
      const CVec los = steering_vector(N, q, cfg.uav_altitude, pos);
      CVec nlos(N);
      for (int n = 0; n < N; ++n)
        nlos[n] = std::complex<double>(gauss(rng), gauss(rng)) / std::sqrt(2.0);
      dst[static_cast<size_t>(t)] = shadow * dist_amp * (los_w * los + nlos_w * nlos);
    }
    return rng;
  };

  for (int l = 0; l < L; ++l)
    synth(NodeKind::User, l, geo.user_positions[static_cast<size_t>(l)], out.users[static_cast<size_t>(l)]);

  for (int k = 0; k < K; ++k) {
    auto rng = synth(NodeKind::Eve, k, geo.eve_positions[static_cast<size_t>(k)], out.eves[static_cast<size_t>(k)]);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < T; ++t) {
      // estimation error drawn uniformly on the eps-ball; csi_eps is a
      // fraction of the channel norm so the model scales with path loss
      CVec dir(N);
      for (int n = 0; n < N; ++n) dir[n] = std::complex<double>(gauss(rng), gauss(rng));
      if (dir.norm() > 0.0) dir /= dir.norm();
      const CVec& h_true = out.eves[static_cast<size_t>(k)][static_cast<size_t>(t)];
      const double eps_abs = params.csi_eps * h_true.norm();
      const double radius = eps_abs * std::pow(unif(rng), 1.0 / (2.0 * N));
      const CVec h_tilde = h_true + radius * dir;
      out.eves_est[static_cast<size_t>(k)][static_cast<size_t>(t)] = h_tilde;
      const double ups = uncertainty_radius(h_tilde, eps_abs);
      out.upsilon[static_cast<size_t>(k)][static_cast<size_t>(t)] = ups;
      auto [worst, best] = gram_bounds(h_tilde, ups);
      out.gram_worst[static_cast<size_t>(k)][static_cast<size_t>(t)] = std::move(worst);
      out.gram_best[static_cast<size_t>(k)][static_cast<size_t>(t)] = std::move(best);
    }
  }
  return out;
}

ChannelRealization resample_at(const ChannelParams& params, Geometry geo,
                               const std::vector<Vec2>& trajectory, const NetworkConfig& cfg,
                               unsigned long seed) {
  geo.trajectory = trajectory;
  return sample_channel(params, geo, cfg, seed);
}

void dump_channel_csv(const ChannelRealization& ch, std::ostream& os) {
  os << "node_id,slot,antenna,re,im\n";
  auto emit = [&os](const std::string& prefix, const std::vector<std::vector<CVec>>& h) {
    for (size_t i = 0; i < h.size(); ++i)
      for (size_t t = 0; t < h[i].size(); ++t)
        for (Eigen::Index n = 0; n < h[i][t].size(); ++n)
          os << prefix << i << "," << t << "," << n << "," << h[i][t][n].real() << ","
             << h[i][t][n].imag() << "\n";
  };
  emit("u", ch.users);
  emit("e", ch.eves);
}

}  // namespace uavrsma
