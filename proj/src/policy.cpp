#include "ackofdm/policy.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ackofdm {

double theta_update(const PhiTable& phi, const BeliefState& belief,
                    double target_per) {
  if (!belief.valid()) throw std::runtime_error("theta_update: L >= U");
  if (!(target_per > 0.0) || !(target_per < 1.0))
    throw std::invalid_argument("theta_update: target_per outside (0, 1)");
  const double q_low = cdf(phi, belief.lower);
  const double q_high = cdf(phi, belief.upper);
  const double mix = target_per * q_high + (1.0 - target_per) * q_low;
  double theta = inv_cdf(phi, mix);
  // Interpolation can land a hair outside the interval when the belief sits
  // in a resolution-limited tail of the table, and the midpoint rounds onto
  // U itself once the interval is only ULPs wide.
  if (theta >= belief.upper)
    theta = belief.lower + 0.5 * (belief.upper - belief.lower);
  if (theta < belief.lower || theta >= belief.upper) theta = belief.lower;
  return theta;
}

double power_alloc(double power_remaining, int slot, int horizon,
                   double target_per) {
  if (slot < 1 || slot > horizon)
    throw std::invalid_argument("power_alloc: slot outside [1, M]");
  if (power_remaining < 0.0)
    throw std::invalid_argument("power_alloc: negative remaining power");
  if (!(target_per > 0.0) || !(target_per < 1.0))
    throw std::invalid_argument("power_alloc: target_per outside (0, 1)");
  if (slot == horizon) return power_remaining;  // spend everything
  const int slots_left = horizon - slot + 1;
  const double denom = -std::expm1(slots_left * std::log1p(-target_per));
  return target_per * power_remaining / denom;
}

double rate_alloc(double power, double theta, const SystemConfig& cfg) {
  if (!(power > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("rate_alloc: power and theta must be > 0");
  const double raw = capacity_highsnr(power, theta, cfg);
  return raw > 0.0 ? raw : 0.0;
}

int select_user(const std::vector<BeliefState>& beliefs) {
  if (beliefs.empty()) throw std::invalid_argument("select_user: no users");
  int best = 0;
  for (int k = 1; k < static_cast<int>(beliefs.size()); ++k)
    if (beliefs[k].lower > beliefs[best].lower) best = k;
  return best;
}

BeliefState update_belief(const BeliefState& belief, double theta, int ack) {
  if (!(theta >= belief.lower) || !(theta < belief.upper))
    throw std::invalid_argument("update_belief: theta outside [L, U)");
  BeliefState next = belief;
  if (ack)
    next.lower = theta;
  else
    next.upper = theta;
  return next;
}

Decision closed_form_decision(const SystemConfig& cfg, const PhiTable& phi,
                              const std::vector<BeliefState>& beliefs,
                              int slot, double power_remaining) {
  Decision d;
  d.slot = slot;
  d.user = select_user(beliefs);
  d.power = power_alloc(power_remaining, slot, cfg.packets_per_slot,
                        cfg.target_per);
  d.theta = theta_update(phi, beliefs[d.user], cfg.target_per);
  d.rate = d.power > 0.0 ? rate_alloc(d.power, d.theta, cfg) : 0.0;
  d.informative = d.rate > 0.0;
  return d;
}

SlotTrace run_time_slot(const SystemConfig& cfg, const PhiTable& phi,
                        const ChannelRealization& realization, Rng& rng) {
  if (phi.subband_count != cfg.subbands)
    throw std::invalid_argument("run_time_slot: phi table subband mismatch");
  const int horizon = cfg.packets_per_slot;

  SlotTrace trace;
  trace.users = cfg.users;
  trace.decisions.reserve(horizon);
  trace.acks.assign(static_cast<std::size_t>(cfg.users) * horizon, 0);
  trace.selected_lower.reserve(horizon);
  trace.selected_upper.reserve(horizon);

  std::vector<double> doppler(cfg.users, 0.0);
  if (cfg.doppler_max > 0.0)
    for (auto& fd : doppler) fd = cfg.doppler_max * rng.uniform01();

  std::vector<BeliefState> beliefs(cfg.users);
  ChannelRealization channel = realization;
  double power_remaining = cfg.total_power;

  for (int m = 1; m <= horizon; ++m) {
    if (cfg.doppler_max > 0.0)
      channel = evolve_doppler(channel, doppler, cfg, rng);

    Decision d = closed_form_decision(cfg, phi, beliefs, m, power_remaining);
    power_remaining -= d.power;

    for (int k = 0; k < cfg.users; ++k) {
      // A zero-rate packet decodes trivially: vacuous ACK from everyone.
      int v = 1;
      if (d.informative) {
        v = cfg.ack_model == AckModel::kIdeal && k == d.user
                // use the decision theta directly so the belief update and
                // the outcome test share one threshold bit-for-bit
                ? (channel.products[k] >= d.theta ? 1 : 0)
                : ack_outcome(cfg.ack_model, d.rate, d.power, channel, k, cfg);
      }
      trace.acks[static_cast<std::size_t>(k) * horizon + (m - 1)] = v;
    }

    const int v_selected =
        trace.acks[static_cast<std::size_t>(d.user) * horizon + (m - 1)];
    if (d.informative) {
      BeliefState next = update_belief(beliefs[d.user], d.theta, v_selected);
      if (!next.valid()) {
        // Contradictory feedback (a NAK at theta == L) can only come from a
        // channel that moved or an exact-decoder mismatch; the history is
        // stale, so keep just the newest bit.
        next = v_selected
                   ? BeliefState{d.theta,
                                 std::numeric_limits<double>::infinity()}
                   : BeliefState{0.0, d.theta};
      }
      beliefs[d.user] = next;
    }

    trace.goodput_bits += v_selected * d.rate;
    trace.packet_errors += 1 - v_selected;
    trace.selected_lower.push_back(beliefs[d.user].lower);
    trace.selected_upper.push_back(beliefs[d.user].upper);
    trace.decisions.push_back(d);
  }
  return trace;
}

void write_slot_trace(std::ostream& out, const SlotTrace& trace) {
  out << "slot,user,power,rate,theta,ack,lower,upper\n";
  for (std::size_t i = 0; i < trace.decisions.size(); ++i) {
    const Decision& d = trace.decisions[i];
    out << d.slot << ',' << d.user + 1 << ',' << d.power << ',' << d.rate
        << ',' << d.theta << ',' << trace.ack_for(d.user, static_cast<int>(i))
        << ',' << trace.selected_lower[i] << ',' << trace.selected_upper[i]
        << '\n';
  }
}

}  // namespace ackofdm
