#pragma once

#include "ackofdm/policy.hpp"

namespace ackofdm {

enum class BaselineKind { kPerfectCsit, kRoundRobin };

// Genie upper bound: per packet slot, equal power P0/M, the user with the
// highest exact mutual information, and the rate set exactly to it, so every
// packet is acknowledged.
SlotTrace perfect_csit_slot(const SystemConfig& cfg,
                            const ChannelRealization& realization);

// No CSIT at all: users in cyclic order, equal power P0/M, rate pinned to the
// epsilon-outage point of the prior (theta = phi^{-1}(eps)); feedback is
// recorded but never used.
SlotTrace round_robin_slot(const SystemConfig& cfg, const PhiTable& phi,
                           const ChannelRealization& realization, Rng& rng);

}  // namespace ackofdm
