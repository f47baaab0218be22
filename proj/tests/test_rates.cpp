#include <doctest.h>

#include <random>

#include "uavrsma/oracle.hpp"
#include "uavrsma/rates.hpp"

using namespace uavrsma;

namespace {
std::mt19937_64 rng(123);
std::normal_distribution<double> gauss;

CVec rand_cvec(int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = std::complex<double>(gauss(rng), gauss(rng));
  return v;
}

Beamformers rand_bf(int n, int l) {
  Beamformers bf;
  bf.w0 = rand_cvec(n);
  for (int j = 0; j < l; ++j) bf.w.push_back(rand_cvec(n));
  return bf;
}
}  // namespace

TEST_CASE("common rate basics") {
  const int N = 4;
  Beamformers bf;
  bf.w0 = CVec::Zero(N);
  bf.w = {CVec::Zero(N)};
  CVec h = rand_cvec(N);
  const double sigma2 = 1.0;
  CHECK(common_rate({h}, bf, sigma2) == doctest::Approx(0.0));

  // single user, |h^H w0|^2 = 3 sigma2, private beams zero -> log2(4) = 2
  h = CVec::Zero(N);
  h[0] = 1.0;
  bf.w0 = CVec::Zero(N);
  bf.w0[0] = std::sqrt(3.0 * sigma2);
  CHECK(common_rate({h}, bf, sigma2) == doctest::Approx(2.0));

  // two identical users: min over equal values
  CHECK(common_rate({h, h}, bf, sigma2) == doctest::Approx(common_rate({h}, bf, sigma2)));
}

TEST_CASE("common rate denominator includes all private beams") {
  const int N = 2;
  CVec h = CVec::Zero(N);
  h[0] = 1.0;
  Beamformers bf;
  bf.w0 = CVec::Zero(N);
  bf.w0[0] = 1.0;
  bf.w = {CVec::Zero(N)};
  bf.w[0][0] = 1.0;  // aligned private beam interferes with the common stream
  const double sigma2 = 1.0;
  CHECK(common_rate({h}, bf, sigma2) == doctest::Approx(std::log2(1.0 + 1.0 / 2.0)));
}

TEST_CASE("private rate basics") {
  const int N = 4;
  const double sigma2 = 1.0;
  CVec h = CVec::Zero(N);
  h[0] = 1.0;
  Beamformers bf;
  bf.w0 = rand_cvec(N);  // common beam must not appear in the denominator
  bf.w = {CVec::Zero(N)};
  bf.w[0][0] = 1.0;  // |h^H w|^2 = sigma2
  CHECK(private_rate(h, bf, 0, sigma2) == doctest::Approx(1.0));
  bf.w[0].setZero();
  CHECK(private_rate(h, bf, 0, sigma2) == doctest::Approx(0.0));
}

TEST_CASE("private rate monotone in beam gain when alone") {
  const int N = 4;
  CVec h = rand_cvec(N);
  Beamformers bf;
  bf.w0 = CVec::Zero(N);
  bf.w = {h};
  double prev = -1.0;
  for (double s : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    Beamformers b2 = bf;
    b2.w[0] *= s;
    const double r = private_rate(h, b2, 0, 1e-3);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("eve rate basics") {
  const int N = 4;
  const double sigma2 = 1.0;
  CVec hk = rand_cvec(N);
  Beamformers bf = rand_bf(N, 2);
  bf.w[0].setZero();
  CHECK(eve_rate(hk, bf, 0, sigma2) == doctest::Approx(0.0));

  // beams orthogonal to the eavesdropper null it completely
  hk = CVec::Zero(N);
  hk[0] = 1.0;
  for (auto& w : bf.w) w[0] = 0.0;
  bf.w0[0] = 0.0;
  CHECK(eve_rate(hk, bf, 0, sigma2) == doctest::Approx(0.0));
}

TEST_CASE("eve rate counts the common beam as interference") {
  const int N = 2;
  CVec hk = CVec::Zero(N);
  hk[0] = 1.0;
  Beamformers bf;
  bf.w0 = CVec::Zero(N);
  bf.w0[0] = 1.0;
  bf.w = {CVec::Zero(N), CVec::Zero(N)};
  bf.w[0][0] = 1.0;
  const double sigma2 = 1.0;
  CHECK(eve_rate(hk, bf, 0, sigma2) == doctest::Approx(std::log2(1.0 + 1.0 / 2.0)));
}

TEST_CASE("secrecy rate") {
  CHECK(secrecy_rate(5.0, 3.0, {1.0}) == doctest::Approx(2.0));
  CHECK(secrecy_rate(0.0, 1.0, {3.0}) == doctest::Approx(0.0));
  CHECK(secrecy_rate(0.0, 1.0, {0.5, 0.9}) == doctest::Approx(0.1));
  // exact invariance in the common-rate split
  for (double a : {0.0, 0.3, 7.5, 123.0})
    CHECK(secrecy_rate(a, 1.7, {0.2, 0.4}) == secrecy_rate(0.0, 1.7, {0.2, 0.4}));
}

TEST_CASE("mos frozen values") {
  QoEParams qoe;
  qoe.bandwidth_hz = 1.0;
  qoe.content_bits = 1.0;
  CHECK(mos(1.0, qoe) == doctest::Approx(4.675));
  CHECK(mos(2.0, qoe) == doctest::Approx(5.4513).epsilon(1e-4));
  CHECK(mos(0.0, qoe) == doctest::Approx(1.0));
  CHECK(mos(-1.0, qoe) == doctest::Approx(1.0));
}

TEST_CASE("trace-form equivalence on random instances") {
  const int N = 4, L = 3;
  const double sigma2 = 0.37;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    CVec h = rand_cvec(N);
    Beamformers bf = rand_bf(N, L);
    const CMat H = h * h.adjoint();
    // trace forms of the private and eavesdropper rates
    auto tr = [&](const CVec& w) { return (H * (w * w.adjoint())).trace().real(); };
    double den_p = sigma2;
    for (int j = 0; j < L; ++j)
      if (j != 1) den_p += tr(bf.w[j]);
    const double rp_tr = std::log2(1.0 + tr(bf.w[1]) / den_p);
    worst = std::max(worst, std::abs(rp_tr - private_rate(h, bf, 1, sigma2)));

    double den_e = sigma2 + tr(bf.w0);
    for (int j = 0; j < L; ++j)
      if (j != 1) den_e += tr(bf.w[j]);
    const double re_tr = std::log2(1.0 + tr(bf.w[1]) / den_e);
    worst = std::max(worst, std::abs(re_tr - eve_rate(h, bf, 1, sigma2)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("evaluate_all agrees with the independent recomputation") {
  NetworkConfig cfg;
  cfg.num_users = 3;
  cfg.num_eves = 2;
  cfg.num_antennas = 4;
  cfg.num_slots = 6;
  cfg.q_start = Vec2(-50, 0);
  cfg.q_final = Vec2(50, 0);
  const Geometry geo = sample_geometry(cfg, 400.0, 2);
  ChannelParams params;
  QoEParams qoe;
  const auto ch = sample_channel(params, geo, cfg, 9);

  std::vector<Beamformers> bf;
  std::vector<RateAllocation> ra;
  for (int t = 0; t < cfg.num_slots; ++t) {
    Beamformers b = rand_bf(cfg.num_antennas, cfg.num_users);
    const double scale = std::sqrt(cfg.p_max_watt / b.total_power());
    b.w0 *= scale;
    for (auto& w : b.w) w *= scale;
    bf.push_back(b);
    ra.push_back({std::vector<double>(cfg.num_users, 0.01)});
  }

  for (bool robust : {true, false}) {
    const auto got = evaluate_all(ch, bf, ra, cfg, params, qoe, robust);
    const auto want = oracle::brute_force_rates(ch, bf, ra, cfg, params, qoe, robust);
    CHECK(std::abs(got.sum_mos - want.sum_mos) <= 1e-9);
    for (int t = 0; t < cfg.num_slots; ++t) {
      CHECK(std::abs(got.common_rate[t] - want.common_rate[t]) <= 1e-9);
      for (int l = 0; l < cfg.num_users; ++l) {
        CHECK(std::abs(got.private_rate[t][l] - want.private_rate[t][l]) <= 1e-9);
        CHECK(std::abs(got.secrecy_rate[t][l] - want.secrecy_rate[t][l]) <= 1e-9);
        CHECK(std::abs(got.mos[t][l] - want.mos[t][l]) <= 1e-9);
        for (int k = 0; k < cfg.num_eves; ++k)
          CHECK(std::abs(got.eve_rate[t][k][l] - want.eve_rate[t][k][l]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("all-zero beams floor every MOS") {
  NetworkConfig cfg;
  cfg.num_users = 2;
  cfg.num_eves = 1;
  cfg.num_slots = 3;
  cfg.q_start = Vec2(-20, 0);
  cfg.q_final = Vec2(20, 0);
  const Geometry geo = sample_geometry(cfg, 300.0, 1);
  ChannelParams params;
  QoEParams qoe;
  const auto ch = sample_channel(params, geo, cfg, 4);
  std::vector<Beamformers> bf(cfg.num_slots);
  std::vector<RateAllocation> ra(cfg.num_slots);
  for (auto& b : bf) {
    b.w0 = CVec::Zero(cfg.num_antennas);
    b.w.assign(cfg.num_users, CVec::Zero(cfg.num_antennas));
  }
  for (auto& r : ra) r.a.assign(cfg.num_users, 0.0);
  const auto rep = evaluate_all(ch, bf, ra, cfg, params, qoe, true);
  for (int t = 0; t < cfg.num_slots; ++t)
    for (int l = 0; l < cfg.num_users; ++l) {
      CHECK(rep.mos[t][l] == doctest::Approx(qoe.mos_floor));
      CHECK(rep.mos_floored[t][l]);
    }
  CHECK(rep.sum_mos == doctest::Approx(qoe.mos_floor * cfg.num_users));
}
