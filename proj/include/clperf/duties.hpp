#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "clperf/chain_spec.hpp"
#include "clperf/errors.hpp"
#include "clperf/rng.hpp"
#include "clperf/slot_math.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Committees are split off the per-slot shuffle in chunks of up to this many
// validators, mirroring mainnet's committee sizing.
inline constexpr std::uint32_t kTargetCommitteeSize = 128;

struct DutyAssignment {
    ValidatorId validator = 0;
    Slot attestation_slot = 0;
    std::uint32_t committee_index = 0;
    std::uint32_t committee_position = 0;
    bool is_aggregator = false;
    std::vector<Slot> proposer_slots;
    std::vector<std::uint64_t> sync_member_periods;

    bool in_sync_committee(Epoch epoch, const ChainSpec& spec) const {
        const std::uint64_t period = epoch / spec.sync_committee_period_epochs;
        return std::find(sync_member_periods.begin(), sync_member_periods.end(), period) != sync_member_periods.end();
    }
};

// All duties of one epoch. Committee tables are kept alongside the flat
// per-validator view because the block scorer and the simulator both need to
// resolve (slot, committee index) back to members.
struct EpochDuties {
    Epoch epoch = 0;
    std::vector<DutyAssignment> by_validator;                      // index = validator id
    std::vector<std::vector<std::vector<ValidatorId>>> committees;  // [slot_in_epoch][committee] -> members
    std::vector<ValidatorId> proposer_by_slot;                      // [slot_in_epoch]
    std::vector<ValidatorId> sync_committee;                        // members for this epoch's period

    const std::vector<ValidatorId>* committee_at(Slot slot, std::uint32_t committee_index,
                                                 const ChainSpec& spec) const {
        if (epoch_of(slot, spec) != epoch) return nullptr;
        const auto& per_slot = committees[slot_in_epoch(slot, spec)];
        if (committee_index >= per_slot.size()) return nullptr;
        return &per_slot[committee_index];
    }
};

namespace detail {

inline std::uint64_t duty_seed(const Seed32& seed, std::uint64_t scope, std::uint64_t domain) {
    const auto w = seed32_words(seed);
    return mix64({w[0], w[1], w[2], w[3], scope, domain});
}

}  // namespace detail

// Deterministic duty assignment for one epoch: every validator attests exactly
// once, committees within a slot differ in size by at most one, one proposer
// per slot drawn uniformly from the whole active set, and a sync committee per
// period. Keyed by (seed, epoch) through a seeded permutation rather than the
// consensus-spec shuffle; only the resulting partition matters here.
inline EpochDuties assign_duties(std::uint32_t validator_count, Epoch epoch, const Seed32& seed,
                                 const ChainSpec& spec) {
    if (validator_count == 0) throw ConfigError("assign_duties requires at least one validator");

    EpochDuties duties;
    duties.epoch = epoch;
    duties.by_validator.resize(validator_count);
    for (ValidatorId v = 0; v < validator_count; ++v) duties.by_validator[v].validator = v;

    // Attester partition.
    std::vector<ValidatorId> order(validator_count);
    std::iota(order.begin(), order.end(), 0);
    DetRng shuffle_rng(detail::duty_seed(seed, epoch, 1));
    shuffle_rng.shuffle(order);

    const std::uint32_t slots = spec.slots_per_epoch;
    duties.committees.resize(slots);
    const std::uint32_t base_size = validator_count / slots;
    const std::uint32_t remainder = validator_count % slots;
    size_t cursor = 0;
    for (std::uint32_t si = 0; si < slots; ++si) {
        const std::uint32_t group_size = base_size + (si < remainder ? 1 : 0);
        std::uint32_t committee_count =
            std::clamp<std::uint32_t>(group_size / kTargetCommitteeSize, 1, spec.max_committees_per_slot);
        if (group_size == 0) committee_count = 0;
        auto& slot_committees = duties.committees[si];
        slot_committees.resize(committee_count);
        for (std::uint32_t c = 0; c < committee_count; ++c) {
            const std::uint32_t c_size = group_size / committee_count + (c < group_size % committee_count ? 1 : 0);
            auto& members = slot_committees[c];
            members.reserve(c_size);
            for (std::uint32_t k = 0; k < c_size; ++k) members.push_back(order[cursor++]);
            for (std::uint32_t pos = 0; pos < members.size(); ++pos) {
                auto& duty = duties.by_validator[members[pos]];
                duty.attestation_slot = first_slot_of_epoch(epoch, spec) + si;
                duty.committee_index = c;
                duty.committee_position = pos;
                duty.is_aggregator = pos < spec.aggregators_per_committee;
            }
        }
    }

    // Proposers, drawn from the full set independently of the partition.
    DetRng proposer_rng(detail::duty_seed(seed, epoch, 2));
    duties.proposer_by_slot.resize(slots);
    for (std::uint32_t si = 0; si < slots; ++si) {
        const ValidatorId proposer = static_cast<ValidatorId>(proposer_rng.below(validator_count));
        duties.proposer_by_slot[si] = proposer;
        duties.by_validator[proposer].proposer_slots.push_back(first_slot_of_epoch(epoch, spec) + si);
    }

    // Sync committee for the period containing this epoch.
    const std::uint64_t period = epoch / spec.sync_committee_period_epochs;
    std::vector<ValidatorId> sync_order(validator_count);
    std::iota(sync_order.begin(), sync_order.end(), 0);
    DetRng sync_rng(detail::duty_seed(seed, period, 3));
    sync_rng.shuffle(sync_order);
    const std::uint32_t sync_size = std::min(spec.sync_committee_size, validator_count);
    duties.sync_committee.assign(sync_order.begin(), sync_order.begin() + sync_size);
    std::sort(duties.sync_committee.begin(), duties.sync_committee.end());
    for (ValidatorId v : duties.sync_committee) duties.by_validator[v].sync_member_periods.push_back(period);

    return duties;
}

}  // namespace clperf
