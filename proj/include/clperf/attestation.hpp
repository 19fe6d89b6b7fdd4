#pragma once

#include <cstdint>
#include <optional>

#include "clperf/chain_view.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Timeliness windows, in slots of inclusion delay, for each flag to count.
inline constexpr std::uint32_t kSourceTimelinessSlots = 5;
inline constexpr std::uint32_t kTargetTimelinessSlots = 32;
inline constexpr std::uint32_t kHeadTimelinessSlots = 1;

// Evaluated correctness of one attestation. Flags form an implication chain:
// head_ok implies target_ok implies source_ok, and head_ok implies an
// inclusion delay of exactly one slot.
struct FlagVector {
    bool source_ok = false;
    bool target_ok = false;
    bool head_ok = false;
    std::optional<std::uint32_t> inclusion_delay;

    bool operator==(const FlagVector&) const = default;
};

// One validator's vote as captured: what it claimed, and where (if anywhere)
// the chain included it.
struct AttestationRecord {
    ValidatorId validator = 0;
    Slot attested_slot = 0;
    Checkpoint claimed_source;
    Checkpoint claimed_target;
    Root claimed_head{};
    std::optional<Slot> inclusion_slot;
};

// Scores an attestation against a chain view. A vote that never made it into
// a block earns nothing; otherwise each flag requires the claim to match the
// view and the inclusion to be timely, with the chain source <= target <= head
// enforced by construction.
inline FlagVector evaluate_attestation(const AttestationRecord& att, const ChainView& view) {
    FlagVector flags;
    if (!att.inclusion_slot) return flags;
    if (*att.inclusion_slot <= att.attested_slot)
        throw DataError("malformed attestation record: inclusion slot " + std::to_string(*att.inclusion_slot) +
                        " not after attested slot " + std::to_string(att.attested_slot));

    const auto delay64 = *att.inclusion_slot - att.attested_slot;
    const std::uint32_t delay = static_cast<std::uint32_t>(delay64);
    flags.inclusion_delay = delay;

    const ChainSpec& spec = view.spec();
    flags.source_ok = delay <= kSourceTimelinessSlots && att.claimed_source == view.justified_at(att.attested_slot);

    if (flags.source_ok && delay <= kTargetTimelinessSlots) {
        const auto target = view.target_checkpoint(epoch_of(att.attested_slot, spec));
        flags.target_ok = target.has_value() && att.claimed_target == *target;
    }

    if (flags.target_ok && delay == kHeadTimelinessSlots)
        flags.head_ok = att.claimed_head == view.head_at(att.attested_slot, spec.attestation_deadline_ms());

    return flags;
}

}  // namespace clperf
