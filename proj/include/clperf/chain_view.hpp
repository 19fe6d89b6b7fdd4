#pragma once

#include <optional>
#include <vector>

#include "clperf/errors.hpp"
#include "clperf/slot_math.hpp"
#include "clperf/types.hpp"

namespace clperf {

struct Checkpoint {
    Epoch epoch = 0;
    Root root{};

    bool operator==(const Checkpoint&) const = default;
};

// One chain as seen from somewhere: the canonical reference chain (blocks
// visible from their slot start) or a node-local view (blocks visible from
// their local arrival). Empty slots are explicit so missed-proposal
// accounting never has to guess.
class ChainView {
public:
    struct Entry {
        Slot slot = 0;
        std::optional<Root> root;
        WallMs visible_from_ms = 0;  // meaningless for empty slots
        Checkpoint justified;        // justified checkpoint while this slot is current
    };

    ChainView() = default;
    explicit ChainView(ChainSpec spec) : spec_(std::move(spec)) {}

    const ChainSpec& spec() const { return spec_; }
    size_t size() const { return entries_.size(); }
    bool covers(Slot slot) const { return slot < entries_.size(); }

    void push_block(Slot slot, const Root& root, WallMs visible_from_ms, const Checkpoint& justified) {
        require_next(slot);
        entries_.push_back(Entry{slot, root, visible_from_ms, justified});
    }

    void push_empty(Slot slot, const Checkpoint& justified) {
        require_next(slot);
        entries_.push_back(Entry{slot, std::nullopt, 0, justified});
    }

    bool has_block(Slot slot) const { return covers(slot) && entries_[slot].root.has_value(); }

    std::optional<Root> root_at(Slot slot) const {
        check_covers(slot);
        return entries_[slot].root;
    }

    Checkpoint justified_at(Slot slot) const {
        check_covers(slot);
        return entries_[slot].justified;
    }

    // Target checkpoint of an epoch: root of the epoch's first non-empty slot.
    // Empty when the view holds no block for that epoch (yet).
    std::optional<Checkpoint> target_checkpoint(Epoch epoch) const {
        const Slot first = first_slot_of_epoch(epoch, spec_);
        const Slot end = first + spec_.slots_per_epoch;
        for (Slot s = first; s < end && s < entries_.size(); ++s)
            if (entries_[s].root) return Checkpoint{epoch, *entries_[s].root};
        return std::nullopt;
    }

    // Latest root visible at (slot, offset). Walks back across empty or
    // not-yet-visible slots.
    Root head_at(Slot slot, WallMs offset_ms) const {
        check_covers(slot);
        const WallMs query_ms = slot_start_ms(slot, spec_) + offset_ms;
        if (query_ms < spec_.genesis_ms()) throw DataError("head_at query predates genesis");
        for (Slot s = slot + 1; s-- > 0;) {
            const Entry& e = entries_[s];
            if (e.root && e.visible_from_ms <= query_ms) return *e.root;
        }
        throw DataError("no block visible at the queried instant");
    }

    // Slot of the head block returned by head_at, or nullopt when nothing is
    // visible yet.
    std::optional<Slot> head_slot_at(Slot slot, WallMs offset_ms) const {
        check_covers(slot);
        const WallMs query_ms = slot_start_ms(slot, spec_) + offset_ms;
        for (Slot s = slot + 1; s-- > 0;) {
            const Entry& e = entries_[s];
            if (e.root && e.visible_from_ms <= query_ms) return s;
        }
        return std::nullopt;
    }

    // Highest non-empty slot strictly below `slot`, if any.
    std::optional<Slot> last_block_before(Slot slot) const {
        for (Slot s = std::min<Slot>(slot, entries_.size()); s-- > 0;)
            if (entries_[s].root) return s;
        return std::nullopt;
    }

private:
    void require_next(Slot slot) {
        if (slot != entries_.size()) throw DataError("chain view slots must be appended in order");
    }
    void check_covers(Slot slot) const {
        if (!covers(slot)) throw DataError("chain view does not cover slot " + std::to_string(slot));
    }

    ChainSpec spec_;
    std::vector<Entry> entries_;
};

}  // namespace clperf
