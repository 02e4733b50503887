#include "ackofdm/baselines.hpp"

#include <stdexcept>

namespace ackofdm {

namespace {

SlotTrace make_trace(const SystemConfig& cfg) {
  SlotTrace trace;
  trace.users = cfg.users;
  trace.decisions.reserve(cfg.packets_per_slot);
  trace.acks.assign(
      static_cast<std::size_t>(cfg.users) * cfg.packets_per_slot, 0);
  trace.selected_lower.assign(cfg.packets_per_slot, 0.0);
  trace.selected_upper.assign(cfg.packets_per_slot,
                              std::numeric_limits<double>::infinity());
  return trace;
}

}  // namespace

SlotTrace perfect_csit_slot(const SystemConfig& cfg,
                            const ChannelRealization& realization) {
  SlotTrace trace = make_trace(cfg);
  const int horizon = cfg.packets_per_slot;
  const double power = cfg.total_power / horizon;

  for (int m = 1; m <= horizon; ++m) {
    int best = 0;
    double best_rate = capacity_exact(power, realization.gains_for(0), cfg);
    for (int k = 1; k < cfg.users; ++k) {
      const double rate = capacity_exact(power, realization.gains_for(k), cfg);
      if (rate > best_rate) {
        best = k;
        best_rate = rate;
      }
    }
    Decision d;
    d.slot = m;
    d.user = best;
    d.power = power;
    d.rate = best_rate;
    d.theta = realization.products[best];
    for (int k = 0; k < cfg.users; ++k) {
      const int v =
          best_rate <= capacity_exact(power, realization.gains_for(k), cfg)
              ? 1
              : 0;
      trace.acks[static_cast<std::size_t>(k) * horizon + (m - 1)] = v;
    }
    trace.goodput_bits += best_rate;  // rate equals capacity: always ACKed
    trace.decisions.push_back(d);
  }
  return trace;
}

SlotTrace round_robin_slot(const SystemConfig& cfg, const PhiTable& phi,
                           const ChannelRealization& realization, Rng& rng) {
  if (phi.subband_count != cfg.subbands)
    throw std::invalid_argument("round_robin_slot: phi table subband mismatch");
  SlotTrace trace = make_trace(cfg);
  const int horizon = cfg.packets_per_slot;
  const double power = cfg.total_power / horizon;
  const double theta = inv_cdf(phi, cfg.target_per);
  const double rate = power > 0.0 ? rate_alloc(power, theta, cfg) : 0.0;

  std::vector<double> doppler(cfg.users, 0.0);
  if (cfg.doppler_max > 0.0)
    for (auto& fd : doppler) fd = cfg.doppler_max * rng.uniform01();
  ChannelRealization channel = realization;

  for (int m = 1; m <= horizon; ++m) {
    if (cfg.doppler_max > 0.0)
      channel = evolve_doppler(channel, doppler, cfg, rng);
    Decision d;
    d.slot = m;
    d.user = (m - 1) % cfg.users;
    d.power = power;
    d.rate = rate;
    d.theta = theta;
    d.informative = rate > 0.0;
    for (int k = 0; k < cfg.users; ++k) {
      const int v = d.informative
                        ? ack_outcome(cfg.ack_model, rate, power, channel, k, cfg)
                        : 1;
      trace.acks[static_cast<std::size_t>(k) * horizon + (m - 1)] = v;
    }
    const int v_selected =
        trace.acks[static_cast<std::size_t>(d.user) * horizon + (m - 1)];
    trace.goodput_bits += v_selected * rate;
    trace.packet_errors += 1 - v_selected;
    trace.decisions.push_back(d);
  }
  return trace;
}

}  // namespace ackofdm
