#include "uavrsma/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavrsma {

namespace {
double abs2(const std::complex<double>& v) { return std::norm(v); }
double log2p1(double snr) { return std::log2(1.0 + snr); }
double quad(const CMat& g, const CVec& w) { return w.dot(g * w).real(); }
}  // namespace

double common_rate(const std::vector<CVec>& h_users, const Beamformers& bf, double sigma2) {
  if (sigma2 <= 0.0) throw std::domain_error("common_rate: sigma2 must be positive");
  double r = std::numeric_limits<double>::infinity();
  for (const auto& h : h_users) {
    const double sig = abs2(h.dot(bf.w0));
    double interf = sigma2;
    for (const auto& wl : bf.w) interf += abs2(h.dot(wl));
    r = std::min(r, log2p1(sig / interf));
  }
  return r;
}

double private_rate(const CVec& h_l, const Beamformers& bf, int l, double sigma2) {
  if (l < 0 || l >= static_cast<int>(bf.w.size())) throw std::out_of_range("private_rate: bad user index");
  const double sig = abs2(h_l.dot(bf.w[static_cast<size_t>(l)]));
  double interf = sigma2;
  for (size_t j = 0; j < bf.w.size(); ++j)
    if (static_cast<int>(j) != l) interf += abs2(h_l.dot(bf.w[j]));
  return log2p1(sig / interf);
}

double eve_rate(const CVec& h_k, const Beamformers& bf, int l, double sigma2) {
  if (l < 0 || l >= static_cast<int>(bf.w.size())) throw std::out_of_range("eve_rate: bad user index");
  const double sig = abs2(h_k.dot(bf.w[static_cast<size_t>(l)]));
  double interf = sigma2 + abs2(h_k.dot(bf.w0));
  for (size_t j = 0; j < bf.w.size(); ++j)
    if (static_cast<int>(j) != l) interf += abs2(h_k.dot(bf.w[j]));
  return log2p1(sig / interf);
}

double eve_rate_robust(const CMat& gram_worst, const CMat& gram_best, const Beamformers& bf,
                       int l, double sigma2) {
  const double sig = quad(gram_worst, bf.w[static_cast<size_t>(l)]);
  double interf = sigma2 + quad(gram_best, bf.w0);
  for (size_t j = 0; j < bf.w.size(); ++j)
    if (static_cast<int>(j) != l) interf += quad(gram_best, bf.w[j]);
  return log2p1(sig / interf);
}

double secrecy_rate(double a_l, double r_priv, const std::vector<double>& r_eve_row) {
  double worst = 0.0;
  for (double r : r_eve_row) worst = std::max(worst, r);
  // (a + R_priv) - max_k (a + R_eve): a cancels
  (void)a_l;
  return std::max(0.0, r_priv - worst);
}

double mos(double r_sec, const QoEParams& qoe) {
  if (r_sec <= 0.0) return qoe.mos_floor;
  return qoe.lambda1 * std::log(r_sec) + qoe.lambda2 +
         qoe.lambda1 * std::log(qoe.bandwidth_hz / qoe.content_bits);
}

MetricsReport evaluate_all(const ChannelRealization& ch, const std::vector<Beamformers>& bf,
                           const std::vector<RateAllocation>& ra, const NetworkConfig& cfg,
                           const ChannelParams& params, const QoEParams& qoe, bool robust) {
  const int T = cfg.num_slots;
  const int L = cfg.num_users;
  const int K = cfg.num_eves;
  if (static_cast<int>(bf.size()) != T || static_cast<int>(ra.size()) != T)
    throw std::invalid_argument("evaluate_all: per-slot inputs must have T entries");
  if (static_cast<int>(ch.users.size()) != L || static_cast<int>(ch.eves.size()) != K)
    throw std::invalid_argument("evaluate_all: channel dimensions mismatch");
  const double sigma2 = params.noise_power;

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
    std::vector<CVec> h_users(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) h_users[static_cast<size_t>(l)] = ch.users[static_cast<size_t>(l)][static_cast<size_t>(t)];
    rep.common_rate[static_cast<size_t>(t)] = common_rate(h_users, bt, sigma2);
    for (int l = 0; l < L; ++l) {
      rep.private_rate[static_cast<size_t>(t)][static_cast<size_t>(l)] =
          private_rate(h_users[static_cast<size_t>(l)], bt, l, sigma2);
      std::vector<double> eve_row(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        const double re =
            robust ? eve_rate_robust(ch.gram_worst[static_cast<size_t>(k)][static_cast<size_t>(t)],
                                     ch.gram_best[static_cast<size_t>(k)][static_cast<size_t>(t)], bt, l, sigma2)
                   : eve_rate(ch.eves[static_cast<size_t>(k)][static_cast<size_t>(t)], bt, l, sigma2);
        rep.eve_rate[static_cast<size_t>(t)][static_cast<size_t>(k)][static_cast<size_t>(l)] = re;
        eve_row[static_cast<size_t>(k)] = re;
      }
      const double rsec = secrecy_rate(ra[static_cast<size_t>(t)].a[static_cast<size_t>(l)],
                                       rep.private_rate[static_cast<size_t>(t)][static_cast<size_t>(l)], eve_row);
      rep.secrecy_rate[static_cast<size_t>(t)][static_cast<size_t>(l)] = rsec;
      rep.mos[static_cast<size_t>(t)][static_cast<size_t>(l)] = mos(rsec, qoe);
      rep.mos_floored[static_cast<size_t>(t)][static_cast<size_t>(l)] = rsec <= 0.0;
      total += rep.mos[static_cast<size_t>(t)][static_cast<size_t>(l)];
    }
  }
  rep.sum_mos = total / T;  // per-slot average so runs with different T compare
  return rep;
}

}  // namespace uavrsma
