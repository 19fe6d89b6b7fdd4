#pragma once

#include <cstdint>

#include "clperf/attestation.hpp"
#include "clperf/duties.hpp"
#include "clperf/errors.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Reward weight of each duty over a common denominator. Defaults follow the
// consensus-layer weights: the target flag is the most valuable, which is why
// a missed target costs more than a missed head.
struct RewardWeights {
    std::uint32_t w_source = 14;
    std::uint32_t w_target = 26;
    std::uint32_t w_head = 14;
    std::uint32_t w_sync = 2;
    std::uint32_t w_proposer = 8;
    std::uint32_t denominator = 64;

    void validate() const {
        if (denominator == 0) throw ConfigError("reward weight denominator must be positive");
        if (w_target < w_head || w_target < w_source)
            throw ConfigError("target flag weight must not be below source or head");
    }

    std::uint32_t attestation_weight(const FlagVector& flags) const {
        return (flags.source_ok ? w_source : 0) + (flags.target_ok ? w_target : 0) + (flags.head_ok ? w_head : 0);
    }

    std::uint32_t perfect_attestation_weight() const { return w_source + w_target + w_head; }
};

// Reward units are an arbitrary scalar (default base 64); every reported
// figure is a ratio, so only proportions matter.
inline constexpr double kDefaultBaseReward = 64.0;

inline double attestation_reward(const FlagVector& flags, const RewardWeights& weights, double base) {
    return base * static_cast<double>(weights.attestation_weight(flags)) / static_cast<double>(weights.denominator);
}

// Reward of one slot of fulfilled sync-committee duty.
inline double sync_slot_reward(const RewardWeights& weights, double base) {
    return base * static_cast<double>(weights.w_sync) / static_cast<double>(weights.denominator);
}

// Maximum extractable reward for one validator-epoch: a perfect attestation
// plus, for sync-committee members, every slot of the epoch signed. Proposer
// rewards are excluded on purpose: proposer selection is probabilistic, so
// they are tracked as separate missed/fulfilled counts instead of skewing the
// reward ceiling.
inline double max_epoch_reward(const DutyAssignment& duty, Epoch epoch, const RewardWeights& weights, double base,
                               const ChainSpec& spec) {
    double mer = base * static_cast<double>(weights.perfect_attestation_weight()) /
                 static_cast<double>(weights.denominator);
    if (duty.in_sync_committee(epoch, spec))
        mer += static_cast<double>(spec.slots_per_epoch) * sync_slot_reward(weights, base);
    return mer;
}

// One validator's scored epoch.
struct EpochPerformance {
    ValidatorId validator = 0;
    Epoch epoch = 0;
    double achieved = 0;
    double mer = 0;
    FlagVector flags;
    std::uint32_t proposals_assigned = 0;
    std::uint32_t proposals_fulfilled = 0;
    std::uint32_t sync_slots_assigned = 0;
    std::uint32_t sync_slots_signed = 0;
    SourceLabel label;
};

}  // namespace clperf
