#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "ackofdm/channel.hpp"
#include "ackofdm/phi_dist.hpp"

namespace ackofdm {

// Interval of channel power products consistent with the causal feedback of
// one user: L grows on ACK, U shrinks on NAK, always 0 <= L < U <= +inf.
struct BeliefState {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool valid() const { return lower >= 0.0 && lower < upper; }
  double gap() const { return upper - lower; }
};

// One packet-slot action. `informative` is false when the rate clamped to
// zero: such a slot still burns its power allocation but its (vacuous) ACK
// carries no information, so no belief is updated.
struct Decision {
  int slot = 0;  // 1-based
  int user = 0;  // 0-based
  double power = 0.0;
  double rate = 0.0;
  double theta = 0.0;
  bool informative = true;
};

struct SlotTrace {
  std::vector<Decision> decisions;        // length M
  std::vector<int> acks;                  // row-major users x M, all users
  std::vector<double> selected_lower;     // selected user's belief after update
  std::vector<double> selected_upper;
  double goodput_bits = 0.0;              // sum of acknowledged rates
  int packet_errors = 0;

  int users = 0;
  int ack_for(int user, int slot_index) const {  // slot_index 0-based
    return acks[static_cast<std::size_t>(user) * decisions.size() + slot_index];
  }
};

// phi(theta) = eps * phi(U) + (1 - eps) * phi(L), solved through the table
// inverse; the result is clamped into [L, U).
double theta_update(const PhiTable& phi, const BeliefState& belief,
                    double target_per);

// eps * P_remaining / (1 - (1-eps)^{M-m+1}); exactly P_remaining at m = M.
double power_alloc(double power_remaining, int slot, int horizon,
                   double target_per);

// max(0, (NT/DM) log2((p/N)^D theta)).
double rate_alloc(double power, double theta, const SystemConfig& cfg);

// argmax_k L_k, ties to the lowest index.
int select_user(const std::vector<BeliefState>& beliefs);

// ACK raises the lower bound to theta, NAK lowers the upper bound to theta.
BeliefState update_belief(const BeliefState& belief, double theta, int ack);

// Computes the slot-m decision for the closed-form policy given the current
// beliefs and remaining power. Shared by the online loop and the oracles.
Decision closed_form_decision(const SystemConfig& cfg, const PhiTable& phi,
                              const std::vector<BeliefState>& beliefs,
                              int slot, double power_remaining);

// Runs one full time slot of the proposed policy: beliefs start at (0, inf),
// each packet slot selects a user, spends power_alloc, transmits at the
// theta-implied rate and folds the selected user's feedback back in. With
// doppler_max > 0 the channel evolves once per packet slot (per-user Doppler
// drawn uniformly from [0, doppler_max]) before the ACK is evaluated.
SlotTrace run_time_slot(const SystemConfig& cfg, const PhiTable& phi,
                        const ChannelRealization& realization, Rng& rng);

// Delimited trace export: slot,user,power,rate,theta,ack,lower,upper.
void write_slot_trace(std::ostream& out, const SlotTrace& trace);

}  // namespace ackofdm
