#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "ackofdm/policy.hpp"

namespace ackofdm {

// Thrown when a requested horizon or state-space budget is out of reach.
struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PowerMode {
  kClosedFormSchedule,  // power pinned to eps * P / (1 - (1-eps)^{M-m+1})
  kGrid,                // choose a fraction of the remaining power per node
};

struct OracleConfig {
  SystemConfig sys;    // epsilon, P0, D and the rate scale come from here
  int horizon = 5;     // oracle's own M
  int theta_grid = 32;       // quantile grid size, used for budget accounting
  PowerMode power_mode = PowerMode::kClosedFormSchedule;
  int power_fractions = 4;   // G_p when power_mode == kGrid

  static constexpr int kMaxEnumerationHorizon = 12;
  static constexpr int kMaxDpHorizon = 6;

  // sys with packets_per_slot forced to the oracle horizon.
  SystemConfig system() const {
    SystemConfig s = sys;
    s.packets_per_slot = horizon;
    return s;
  }
};

// State handed to a policy under evaluation: everything the closed-form
// scheduler (or any feedback-history policy) may depend on.
struct PolicyState {
  int slot = 1;  // 1-based
  std::vector<BeliefState> beliefs;
  double power_remaining = 0.0;
  std::vector<int> feedback_path;  // selected-user ACK bits so far
};

using PolicyFn = std::function<Decision(const PolicyState&)>;

// The proposed scheduler wrapped as a PolicyFn.
PolicyFn closed_form_policy(const SystemConfig& cfg, const PhiTable& phi);

// Node of an evaluated decision tree. The stored value satisfies
//   value = ack_prob * rate + ack_prob * value(ack) + (1-ack_prob) * value(nak)
// with ack_prob = 1 - eps on informative nodes and 1 on vacuous (zero-rate)
// ones.
struct OracleNode {
  int slot = 0;
  int user = 0;
  double lower = 0.0;
  double upper = 0.0;
  double theta = 0.0;
  double power = 0.0;
  double rate = 0.0;
  double power_remaining = 0.0;  // before spending `power`
  double value = 0.0;            // expected goodput from this node on
  double ack_prob = 0.0;
  int ack_child = -1;
  int nak_child = -1;
};

struct TreeEvaluation {
  double value = 0.0;
  std::vector<OracleNode> nodes;  // root at index 0; empty only if horizon 0
};

// Exact expected goodput of `policy` by full binary-tree traversal of the
// selected user's ACK/NAK outcomes. Branch weights are (1-eps, eps): exact
// under the ideal ACK model whenever the policy's theta satisfies the
// per-slot outage constraint, which the closed form does by construction.
TreeEvaluation enumerate_policy_value(const PolicyFn& policy,
                                      const OracleConfig& ocfg,
                                      const PhiTable& phi);

// Single-user finite-horizon backward induction on the belief state (L, U)
// and remaining power. theta is pinned per state by the outage constraint
// (the same mixture the closed form uses), so the optimization runs over the
// power schedule; with kClosedFormSchedule the recursion reduces to policy
// evaluation of the closed form on the identical state graph.
TreeEvaluation dp_optimal(const OracleConfig& ocfg, const PhiTable& phi);

// Traverses an evaluated tree against a channel realization: at each node the
// ACK is the ideal-model outcome X >= theta (vacuous nodes always ACK).
SlotTrace replay_online(const TreeEvaluation& tree,
                        const ChannelRealization& realization, Rng& rng);

// One line per node: id, slot, L, U, theta, p, r, value, children.
void dump_policy_tree(std::ostream& out, const TreeEvaluation& tree);

}  // namespace ackofdm
