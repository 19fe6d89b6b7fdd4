#pragma once

#include <cstdint>

#include "clperf/chain_spec.hpp"
#include "clperf/types.hpp"

namespace clperf {

inline Epoch epoch_of(Slot slot, const ChainSpec& spec) { return slot / spec.slots_per_epoch; }

inline std::uint32_t slot_in_epoch(Slot slot, const ChainSpec& spec) {
    return static_cast<std::uint32_t>(slot % spec.slots_per_epoch);
}

inline Slot first_slot_of_epoch(Epoch epoch, const ChainSpec& spec) { return epoch * spec.slots_per_epoch; }

inline WallMs slot_start_ms(Slot slot, const ChainSpec& spec) {
    return spec.genesis_ms() + static_cast<WallMs>(slot) * spec.slot_ms();
}

// The in-slot schedule: block proposal at start, attestations due at the
// attestation deadline, aggregates due at the aggregation deadline.
struct SlotWallTimes {
    std::int64_t start_s;
    std::int64_t attestation_deadline_s;
    std::int64_t aggregation_deadline_s;
    std::int64_t end_s;
};

inline SlotWallTimes slot_wall_times(Slot slot, const ChainSpec& spec) {
    const std::int64_t start = spec.genesis_time + static_cast<std::int64_t>(slot) * spec.seconds_per_slot;
    return {start, start + spec.attestation_deadline_s, start + spec.aggregation_deadline_s,
            start + spec.seconds_per_slot};
}

// Maps wall-clock milliseconds to slots. `future_tolerance_ms` bounds how far
// ahead of the local clock an event's slot may start before it is rejected as
// clock skew.
class SlotClock {
public:
    explicit SlotClock(ChainSpec spec, WallMs future_tolerance_ms = 1000)
        : spec_(std::move(spec)), future_tolerance_ms_(future_tolerance_ms) {}

    const ChainSpec& spec() const { return spec_; }
    WallMs future_tolerance_ms() const { return future_tolerance_ms_; }

    WallMs start_ms(Slot slot) const { return slot_start_ms(slot, spec_); }

    // Slot containing the given wall time (clamped to slot 0 before genesis).
    Slot slot_at(WallMs wall_ms) const {
        if (wall_ms <= spec_.genesis_ms()) return 0;
        return static_cast<Slot>((wall_ms - spec_.genesis_ms()) / spec_.slot_ms());
    }

private:
    ChainSpec spec_;
    WallMs future_tolerance_ms_;
};

}  // namespace clperf
