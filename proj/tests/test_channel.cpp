#include <doctest.h>

#include <cmath>
#include <vector>

#include "ackofdm/channel.hpp"
#include "ackofdm/policy.hpp"
#include "test_helpers.hpp"

using namespace ackofdm;

namespace {

SystemConfig tiny_config(int n, int d, int m, double t) {
  SystemConfig cfg;
  cfg.subcarriers = n;
  cfg.subbands = d;
  cfg.users = 1;
  cfg.packets_per_slot = m;
  cfg.slot_duration = t;
  return cfg;
}

// Independent series evaluation of J0 for the Doppler correlation.
double bessel_j0_series(double x) {
  double term = 1.0;
  double sum = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 40; ++k) {
    term *= -q / (k * static_cast<double>(k));
    sum += term;
  }
  return sum;
}

ChannelRealization single_user_realization(double product, int subbands) {
  ChannelRealization r;
  r.users = 1;
  r.subbands = subbands;
  const double per_band = std::pow(product, 1.0 / subbands);
  r.amplitudes.assign(subbands, std::sqrt(per_band));
  r.power_gains.assign(subbands, per_band);
  r.products = {product};
  return r;
}

}  // namespace

TEST_CASE("channel: draws are unit-mean exponential and reproducible") {
  SystemConfig cfg = tiny_config(1, 1, 1, 1.0);
  Rng rng(42);
  double sum = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) sum += draw_channel(cfg, rng).power_gains[0];
  CHECK(std::abs(sum / n - 1.0) < 0.01);

  cfg.users = 2;
  cfg.subbands = 3;
  cfg.subcarriers = 3;
  Rng a(7), b(7);
  const ChannelRealization first = draw_channel(cfg, a);
  const ChannelRealization second = draw_channel(cfg, b);
  for (std::size_t i = 0; i < first.power_gains.size(); ++i)
    CHECK(first.power_gains[i] == second.power_gains[i]);
  for (int k = 0; k < 2; ++k) {
    double product = 1.0;
    for (const double h : first.gains_for(k)) product *= h;
    CHECK(std::abs(product - first.products[k]) <= 1e-12 * std::abs(product));
  }
}

TEST_CASE("channel: exact capacity") {
  const SystemConfig cfg = tiny_config(2, 2, 1, 1.0);
  const std::vector<double> ones = {1.0, 1.0};
  CHECK(capacity_exact(2.0, ones, cfg) == doctest::Approx(2.0));
  CHECK(capacity_exact(0.0, ones, cfg) == 0.0);
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(capacity_exact(5.0, zeros, cfg) == 0.0);
  CHECK_THROWS_AS(capacity_exact(-1.0, ones, cfg), std::invalid_argument);
}

TEST_CASE("channel: high-SNR capacity") {
  const SystemConfig cfg = tiny_config(4, 1, 1, 1.0);
  CHECK(capacity_highsnr(8.0, 2.0, cfg) == doctest::Approx(8.0));
  CHECK(capacity_highsnr(4.0, 1.0, cfg) == doctest::Approx(0.0));
  CHECK_THROWS_AS(capacity_highsnr(0.0, 1.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(capacity_highsnr(1.0, -1.0, cfg), std::invalid_argument);
}

TEST_CASE("channel: ideal ACK is the threshold test on X") {
  // theta = (N/p)^D 2^{rDM/NT} = 4 for N=1, D=1, M=1, T=1, p=1, r=2
  const SystemConfig cfg = tiny_config(1, 1, 1, 1.0);
  CHECK(implied_threshold(2.0, 1.0, cfg) == doctest::Approx(4.0));
  CHECK(ack_outcome(AckModel::kIdeal, 2.0, 1.0, single_user_realization(5.0, 1),
                    0, cfg) == 1);
  CHECK(ack_outcome(AckModel::kIdeal, 2.0, 1.0, single_user_realization(4.0, 1),
                    0, cfg) == 1);  // equality counts as success
  CHECK(ack_outcome(AckModel::kIdeal, 2.0, 1.0, single_user_realization(3.0, 1),
                    0, cfg) == 0);
}

TEST_CASE("channel: ideal ACK bit-identical to the implied threshold") {
  const SystemConfig cfg = tiny_config(8, 2, 4, 0.5);
  Rng rng(11);
  SystemConfig draw_cfg = cfg;
  int mismatches = 0;
  for (int i = 0; i < 100'000; ++i) {
    const ChannelRealization r = draw_channel(draw_cfg, rng);
    const double p = 0.5 + 100.0 * rng.uniform01();
    const double rate = 4.0 * rng.uniform01();
    const int via_outcome = ack_outcome(AckModel::kIdeal, rate, p, r, 0, cfg);
    const int via_threshold =
        r.products[0] >= implied_threshold(rate, p, cfg) ? 1 : 0;
    mismatches += via_outcome != via_threshold;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("channel: rate pair round-trips through the threshold") {
  const SystemConfig cfg = tiny_config(16, 2, 8, 0.1);
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double p = cfg.subcarriers * (2.0 + 1000.0 * rng.uniform01());
    const double theta = 0.05 + 4.0 * rng.uniform01();
    const double rate = rate_alloc(p, theta, cfg);
    if (rate <= 0.0) continue;
    CHECK(std::abs(implied_threshold(rate, p, cfg) - theta) <= 1e-9 * theta);
  }
}

TEST_CASE("channel: high-SNR approximation gap in the operating region") {
  // Draws constructed so each subband's received SNR lies in 10..30 dB.
  const SystemConfig cfg = tiny_config(64, 3, 30, 0.1);
  Rng rng(3);
  int within = 0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    const double snr_db = 10.0 + 20.0 * rng.uniform01();
    const double p = cfg.subcarriers * std::pow(10.0, snr_db / 10.0);
    ChannelRealization r;
    r.users = 1;
    r.subbands = cfg.subbands;
    r.power_gains.resize(cfg.subbands);
    double product = 1.0;
    for (int d = 0; d < cfg.subbands; ++d) {
      const double received = 10.0 + 990.0 * rng.uniform01();
      r.power_gains[d] = received * cfg.subcarriers / p;
      product *= r.power_gains[d];
    }
    r.products = {product};
    const double exact = capacity_exact(p, r.gains_for(0), cfg);
    const double approx = capacity_highsnr(p, product, cfg);
    within += std::abs(exact - approx) < 0.02 * exact;
  }
  CHECK(within >= static_cast<int>(0.95 * n));
}

TEST_CASE("channel: Doppler evolution") {
  SystemConfig cfg = tiny_config(64, 2, 30, 0.1);
  cfg.users = 2;
  Rng rng(21);
  const ChannelRealization base = draw_channel(cfg, rng);

  SUBCASE("zero Doppler is the identity") {
    const ChannelRealization same = evolve_doppler(base, 0.0, cfg, rng);
    for (std::size_t i = 0; i < base.amplitudes.size(); ++i)
      CHECK(same.amplitudes[i] == base.amplitudes[i]);
    CHECK_THROWS_AS(evolve_doppler(base, -1.0, cfg, rng),
                    std::invalid_argument);
  }

  SUBCASE("correlation coefficient is J0(2 pi fd T / M)") {
    // fd = 50 Hz, T/M = 1/300 s -> rho = J0(pi/3) = 0.7440720...
    const double expected = bessel_j0_series(M_PI / 3.0);
    CHECK(std::abs(expected - 0.744072) < 1e-6);
    const int n = 400'000;
    std::complex<double> mean = 0.0;
    const ChannelRealization fixed = single_user_realization(1.0, 1);
    const SystemConfig one = tiny_config(64, 1, 30, 0.1);
    for (int i = 0; i < n; ++i)
      mean += evolve_doppler(fixed, 50.0, one, rng).amplitudes[0];
    mean /= static_cast<double>(n);
    // E[g'] = rho g; innovation std ~ 0.67, so 3 sigma of the mean ~ 0.0032
    CHECK(std::abs(mean.real() - expected) < 0.004);
    CHECK(std::abs(mean.imag()) < 0.004);
  }

  SUBCASE("marginals stay unit-mean exponential") {
    double sum = 0.0;
    int count = 0;
    Rng walk(77);
    for (int rep = 0; rep < 200; ++rep) {
      ChannelRealization current = draw_channel(cfg, walk);
      for (int step = 0; step < 100; ++step)
        current = evolve_doppler(current, 80.0, cfg, walk);
      for (const double h : current.power_gains) {
        sum += h;
        ++count;
      }
    }
    CHECK(std::abs(sum / count - 1.0) < 0.02);
  }
}
