#include "ackofdm/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <unordered_map>

namespace ackofdm {

namespace {

constexpr std::size_t kMemoBudget = 1u << 22;

double ack_weight(double target_per) { return 1.0 - target_per; }

struct Key {
  int slot;
  std::uint64_t lower_bits;
  std::uint64_t upper_bits;
  std::uint64_t power_bits;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(k.slot);
    for (std::uint64_t v : {k.lower_bits, k.upper_bits, k.power_bits}) {
      h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ull;
    }
    return static_cast<std::size_t>(h);
  }
};

Key make_key(int slot, const BeliefState& b, double power) {
  return {slot, std::bit_cast<std::uint64_t>(b.lower),
          std::bit_cast<std::uint64_t>(b.upper),
          std::bit_cast<std::uint64_t>(power)};
}

struct DpEntry {
  double value = 0.0;
  double best_power = 0.0;
};

class DpSolver {
 public:
  DpSolver(const OracleConfig& ocfg, const PhiTable& phi)
      : cfg_(ocfg.system()), ocfg_(ocfg), phi_(phi) {}

  double solve(int slot, const BeliefState& belief, double power_remaining) {
    if (slot > ocfg_.horizon) return 0.0;
    const Key key = make_key(slot, belief, power_remaining);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.value;
    if (memo_.size() > kMemoBudget)
      throw resource_limit_error("dp_optimal: state-space budget exceeded");

    const double theta = theta_update(phi_, belief, cfg_.target_per);
    DpEntry entry;
    entry.value = -1.0;
    for (const double power : power_candidates(slot, power_remaining)) {
      const double value = action_value(slot, belief, power_remaining, power,
                                        theta);
      if (value > entry.value) {
        entry.value = value;
        entry.best_power = power;
      }
    }
    memo_.emplace(key, entry);
    return entry.value;
  }

  // Materializes the argmax action tree for replay.
  int build_tree(int slot, const BeliefState& belief, double power_remaining,
                 std::vector<OracleNode>& nodes) {
    if (slot > ocfg_.horizon) return -1;
    const Key key = make_key(slot, belief, power_remaining);
    const DpEntry entry = memo_.at(key);

    OracleNode node;
    node.slot = slot;
    node.lower = belief.lower;
    node.upper = belief.upper;
    node.theta = theta_update(phi_, belief, cfg_.target_per);
    node.power = entry.best_power;
    node.rate = entry.best_power > 0.0
                    ? rate_alloc(entry.best_power, node.theta, cfg_)
                    : 0.0;
    node.power_remaining = power_remaining;
    node.value = entry.value;
    const bool informative = node.rate > 0.0;
    node.ack_prob = informative ? ack_weight(cfg_.target_per) : 1.0;

    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);
    const double left = power_remaining - entry.best_power;
    if (informative) {
      nodes[index].ack_child = build_tree(
          slot + 1, update_belief(belief, node.theta, 1), left, nodes);
      nodes[index].nak_child = build_tree(
          slot + 1, update_belief(belief, node.theta, 0), left, nodes);
    } else {
      nodes[index].ack_child = build_tree(slot + 1, belief, left, nodes);
    }
    return index;
  }

 private:
  std::vector<double> power_candidates(int slot, double power_remaining) {
    if (ocfg_.power_mode == PowerMode::kClosedFormSchedule)
      return {power_alloc(power_remaining, slot, ocfg_.horizon,
                          cfg_.target_per)};
    std::vector<double> candidates;
    if (slot == ocfg_.horizon) return {power_remaining};
    candidates.reserve(ocfg_.power_fractions);
    for (int j = 1; j <= ocfg_.power_fractions; ++j)
      candidates.push_back(power_remaining *
                           (static_cast<double>(j) / ocfg_.power_fractions));
    return candidates;
  }

  double action_value(int slot, const BeliefState& belief,
                      double power_remaining, double power, double theta) {
    const double rate = power > 0.0 ? rate_alloc(power, theta, cfg_) : 0.0;
    const double left = power_remaining - power;
    if (rate <= 0.0) return solve(slot + 1, belief, left);  // vacuous slot
    const double w = ack_weight(cfg_.target_per);
    return w * rate + w * solve(slot + 1, update_belief(belief, theta, 1), left) +
           (1.0 - w) * solve(slot + 1, update_belief(belief, theta, 0), left);
  }

  SystemConfig cfg_;
  OracleConfig ocfg_;
  const PhiTable& phi_;
  std::unordered_map<Key, DpEntry, KeyHash> memo_;
};

class Enumerator {
 public:
  Enumerator(const PolicyFn& policy, const OracleConfig& ocfg)
      : policy_(policy), cfg_(ocfg.system()), horizon_(ocfg.horizon) {}

  int run(PolicyState state, std::vector<OracleNode>& nodes, double* value) {
    if (state.slot > horizon_) {
      *value = 0.0;
      return -1;
    }
    const Decision d = policy_(state);

    OracleNode node;
    node.slot = state.slot;
    node.user = d.user;
    node.lower = state.beliefs[d.user].lower;
    node.upper = state.beliefs[d.user].upper;
    node.theta = d.theta;
    node.power = d.power;
    node.rate = d.rate;
    node.power_remaining = state.power_remaining;
    const bool informative = d.informative && d.rate > 0.0;
    node.ack_prob = informative ? ack_weight(cfg_.target_per) : 1.0;
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const double left = state.power_remaining - d.power;
    double ack_value = 0.0;
    double nak_value = 0.0;
    if (informative) {
      PolicyState ack_state = state;
      ack_state.slot += 1;
      ack_state.power_remaining = left;
      ack_state.beliefs[d.user] =
          update_belief(state.beliefs[d.user], d.theta, 1);
      ack_state.feedback_path.push_back(1);

      PolicyState nak_state = state;
      nak_state.slot += 1;
      nak_state.power_remaining = left;
      nak_state.beliefs[d.user] =
          update_belief(state.beliefs[d.user], d.theta, 0);
      nak_state.feedback_path.push_back(0);

      nodes[index].ack_child = run(std::move(ack_state), nodes, &ack_value);
      nodes[index].nak_child = run(std::move(nak_state), nodes, &nak_value);
      const double w = ack_weight(cfg_.target_per);
      *value = w * nodes[index].rate + w * ack_value + (1.0 - w) * nak_value;
    } else {
      PolicyState next = state;
      next.slot += 1;
      next.power_remaining = left;
      next.feedback_path.push_back(1);
      nodes[index].ack_child = run(std::move(next), nodes, &ack_value);
      *value = ack_value;
    }
    nodes[index].value = *value;
    return index;
  }

 private:
  const PolicyFn& policy_;
  SystemConfig cfg_;
  int horizon_;
};

}  // namespace

PolicyFn closed_form_policy(const SystemConfig& cfg, const PhiTable& phi) {
  return [cfg, &phi](const PolicyState& state) {
    return closed_form_decision(cfg, phi, state.beliefs, state.slot,
                                state.power_remaining);
  };
}

TreeEvaluation enumerate_policy_value(const PolicyFn& policy,
                                      const OracleConfig& ocfg,
                                      const PhiTable& phi) {
  if (ocfg.horizon < 1)
    throw std::invalid_argument("enumerate_policy_value: horizon >= 1");
  if (ocfg.horizon > OracleConfig::kMaxEnumerationHorizon)
    throw resource_limit_error(
        "enumerate_policy_value: horizon exceeds enumeration budget");
  if (phi.subband_count != ocfg.sys.subbands)
    throw std::invalid_argument(
        "enumerate_policy_value: phi table subband mismatch");
  const SystemConfig cfg = ocfg.system();

  TreeEvaluation result;
  result.nodes.reserve((std::size_t{2} << ocfg.horizon));
  PolicyState root;
  root.slot = 1;
  root.beliefs.assign(cfg.users, BeliefState{});
  root.power_remaining = cfg.total_power;
  Enumerator enumerator(policy, ocfg);
  enumerator.run(std::move(root), result.nodes, &result.value);
  return result;
}

TreeEvaluation dp_optimal(const OracleConfig& ocfg, const PhiTable& phi) {
  if (ocfg.horizon < 1) throw std::invalid_argument("dp_optimal: horizon >= 1");
  if (ocfg.horizon > OracleConfig::kMaxDpHorizon)
    throw resource_limit_error("dp_optimal: horizon exceeds DP budget");
  if (phi.subband_count != ocfg.sys.subbands)
    throw std::invalid_argument("dp_optimal: phi table subband mismatch");
  if (ocfg.sys.users != 1)
    throw std::invalid_argument("dp_optimal: single-user instances only");
  if (ocfg.theta_grid < 1 ||
      (ocfg.power_mode == PowerMode::kGrid && ocfg.power_fractions < 1))
    throw std::invalid_argument("dp_optimal: grids must be non-empty");

  DpSolver solver(ocfg, phi);
  TreeEvaluation result;
  BeliefState root;
  result.value = solver.solve(1, root, ocfg.sys.total_power);
  result.nodes.reserve((std::size_t{2} << ocfg.horizon));
  solver.build_tree(1, root, ocfg.sys.total_power, result.nodes);
  return result;
}

SlotTrace replay_online(const TreeEvaluation& tree,
                        const ChannelRealization& realization, Rng& rng) {
  (void)rng;
  if (tree.nodes.empty()) throw std::runtime_error("replay_online: empty tree");
  const double product = realization.products.at(0);

  SlotTrace trace;
  trace.users = 1;
  int index = 0;
  while (index >= 0) {
    if (index >= static_cast<int>(tree.nodes.size()))
      throw std::runtime_error("replay_online: malformed tree");
    const OracleNode& node = tree.nodes[index];
    const bool informative = node.rate > 0.0;
    const int v = informative ? (product >= node.theta ? 1 : 0) : 1;
    Decision d;
    d.slot = node.slot;
    d.user = 0;
    d.power = node.power;
    d.rate = node.rate;
    d.theta = node.theta;
    d.informative = informative;
    trace.decisions.push_back(d);
    trace.acks.push_back(v);
    trace.goodput_bits += v * node.rate;
    trace.packet_errors += informative ? 1 - v : 0;
    trace.selected_lower.push_back(informative && v ? node.theta : node.lower);
    trace.selected_upper.push_back(informative && !v ? node.theta : node.upper);
    index = v ? node.ack_child : node.nak_child;
  }
  return trace;
}

void dump_policy_tree(std::ostream& out, const TreeEvaluation& tree) {
  out << "id,slot,lower,upper,theta,power,rate,value,ack_child,nak_child\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const OracleNode& n = tree.nodes[i];
    out << i << ',' << n.slot << ',' << n.lower << ',' << n.upper << ','
        << n.theta << ',' << n.power << ',' << n.rate << ',' << n.value << ','
        << n.ack_child << ',' << n.nak_child << '\n';
  }
}

}  // namespace ackofdm
