#include "ackofdm/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace ackofdm {

double SystemConfig::transmit_snr_db() const {
  return 10.0 * std::log10(total_power / packets_per_slot);
}

void SystemConfig::validate() const {
  if (subcarriers < 1) throw std::invalid_argument("config: subcarriers >= 1");
  if (subbands < 1 || subbands > subcarriers)
    throw std::invalid_argument("config: need 1 <= subbands <= subcarriers");
  if (users < 1) throw std::invalid_argument("config: users >= 1");
  if (packets_per_slot < 1)
    throw std::invalid_argument("config: packets_per_slot >= 1");
  if (!(slot_duration > 0.0))
    throw std::invalid_argument("config: slot_duration > 0");
  if (!(total_power >= 0.0))
    throw std::invalid_argument("config: total_power >= 0");
  if (!(target_per > 0.0) || !(target_per < 1.0))
    throw std::invalid_argument("config: target_per must be inside (0, 1)");
  if (doppler_max < 0.0)
    throw std::invalid_argument("config: doppler_max >= 0");
}

namespace {

void refresh_derived(ChannelRealization& r) {
  const std::size_t total = r.amplitudes.size();
  r.power_gains.resize(total);
  r.products.assign(r.users, 1.0);
  for (int k = 0; k < r.users; ++k) {
    double product = 1.0;
    for (int d = 0; d < r.subbands; ++d) {
      const std::size_t idx = static_cast<std::size_t>(k) * r.subbands + d;
      const double h = std::norm(r.amplitudes[idx]);
      r.power_gains[idx] = h;
      product *= h;
    }
    r.products[k] = product;
  }
}

}  // namespace

ChannelRealization draw_channel(const SystemConfig& cfg, Rng& rng) {
  ChannelRealization r;
  r.users = cfg.users;
  r.subbands = cfg.subbands;
  r.amplitudes.resize(static_cast<std::size_t>(cfg.users) * cfg.subbands);
  for (auto& g : r.amplitudes) g = rng.complex_gaussian();
  refresh_derived(r);
  return r;
}

double capacity_exact(double power, std::span<const double> gains,
                      const SystemConfig& cfg) {
  if (!(power >= 0.0)) throw std::invalid_argument("capacity_exact: power < 0");
  double bits = 0.0;
  for (const double h : gains)
    bits += std::log2(1.0 + power * h / cfg.subcarriers);
  return cfg.rate_scale() * bits;
}

double capacity_highsnr(double power, double product,
                        const SystemConfig& cfg) {
  if (!(power > 0.0) || !(product > 0.0))
    throw std::invalid_argument("capacity_highsnr: power and product must be > 0");
  return cfg.rate_scale() *
         (cfg.subbands * std::log2(power / cfg.subcarriers) +
          std::log2(product));
}

double implied_threshold(double rate, double power, const SystemConfig& cfg) {
  // log-domain to avoid overflow of (N/p)^D at small powers
  const double log2_theta =
      cfg.subbands * std::log2(cfg.subcarriers / power) +
      rate * cfg.subbands * cfg.packets_per_slot /
          (cfg.subcarriers * cfg.slot_duration);
  return std::exp2(log2_theta);
}

int ack_outcome(AckModel model, double rate, double power,
                const ChannelRealization& realization, int user,
                const SystemConfig& cfg) {
  if (rate < 0.0) throw std::invalid_argument("ack_outcome: rate < 0");
  if (model == AckModel::kExact)
    return rate <= capacity_exact(power, realization.gains_for(user), cfg) ? 1
                                                                           : 0;
  return realization.products[user] >= implied_threshold(rate, power, cfg) ? 1
                                                                           : 0;
}

ChannelRealization evolve_doppler(const ChannelRealization& realization,
                                  std::span<const double> doppler_hz,
                                  const SystemConfig& cfg, Rng& rng) {
  ChannelRealization next = realization;
  const double packet_duration = cfg.slot_duration / cfg.packets_per_slot;
  for (int k = 0; k < realization.users; ++k) {
    const double fd = doppler_hz[k];
    if (fd < 0.0) throw std::invalid_argument("evolve_doppler: doppler < 0");
    if (fd == 0.0) continue;
    const double rho =
        std::cyl_bessel_j(0.0, 2.0 * M_PI * fd * packet_duration);
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int d = 0; d < realization.subbands; ++d) {
      const std::size_t idx =
          static_cast<std::size_t>(k) * realization.subbands + d;
      next.amplitudes[idx] =
          rho * realization.amplitudes[idx] + innovation * rng.complex_gaussian();
    }
  }
  refresh_derived(next);
  return next;
}

ChannelRealization evolve_doppler(const ChannelRealization& realization,
                                  double doppler_hz, const SystemConfig& cfg,
                                  Rng& rng) {
  std::vector<double> per_user(realization.users, doppler_hz);
  return evolve_doppler(realization, per_user, cfg, rng);
}

}  // namespace ackofdm
