#pragma once

// Shared fixture builders for the test suites. Oracles that check a module
// stay deliberately independent of the implementation path they verify.

#include <cstdint>
#include <optional>
#include <vector>

#include "clperf/attestation.hpp"
#include "clperf/chain_spec.hpp"
#include "clperf/chain_view.hpp"
#include "clperf/rng.hpp"

namespace testutil {

using namespace clperf;

// A canonical-style view: blocks visible from their slot start, justified
// checkpoint fixed per epoch as the previous epoch's target.
struct FixtureChain {
    ChainSpec spec;
    ChainView view;
    std::vector<std::optional<Root>> roots;  // per slot
};

// Builds a chain over `slots` slots where `empty_mask` bit i marks slot i as
// empty. Roots are derived deterministically from the slot index.
inline FixtureChain make_chain(const ChainSpec& spec, std::uint64_t slots, std::uint64_t empty_mask = 0,
                               std::uint64_t tag = 0xf1c5) {
    FixtureChain fx{spec, ChainView(spec), {}};
    Checkpoint justified{0, Root{}};
    for (Slot s = 0; s < slots; ++s) {
        const Epoch e = epoch_of(s, spec);
        if (s == first_slot_of_epoch(e, spec) && e >= 1) {
            if (auto target = fx.view.target_checkpoint(e - 1)) justified = *target;
        }
        const bool empty = (empty_mask >> s) & 1;
        if (empty) {
            fx.view.push_empty(s, justified);
            fx.roots.push_back(std::nullopt);
        } else {
            const Root root = Root::derive(tag, s);
            fx.view.push_block(s, root, slot_start_ms(s, spec), justified);
            fx.roots.push_back(root);
        }
    }
    return fx;
}

// Independent flag oracle: recomputes every rule from scratch by scanning the
// fixture's raw slot table, never calling into ChainView helpers.
inline FlagVector oracle_flags(const AttestationRecord& att, const FixtureChain& fx) {
    FlagVector out;
    if (!att.inclusion_slot) return out;
    const std::uint64_t delay = *att.inclusion_slot - att.attested_slot;
    out.inclusion_delay = static_cast<std::uint32_t>(delay);

    // Justified checkpoint at the attested slot: previous epoch's first block.
    const Epoch e = epoch_of(att.attested_slot, fx.spec);
    Checkpoint justified{0, Root{}};
    if (e >= 1) {
        for (Slot s = first_slot_of_epoch(e - 1, fx.spec); s < first_slot_of_epoch(e, fx.spec); ++s) {
            if (s < fx.roots.size() && fx.roots[s]) {
                justified = Checkpoint{e - 1, *fx.roots[s]};
                break;
            }
        }
    }
    const bool source_match = att.claimed_source == justified;
    out.source_ok = source_match && delay <= 5;

    std::optional<Checkpoint> target;
    for (Slot s = first_slot_of_epoch(e, fx.spec); s < first_slot_of_epoch(e + 1, fx.spec) && s < fx.roots.size();
         ++s) {
        if (fx.roots[s]) {
            target = Checkpoint{e, *fx.roots[s]};
            break;
        }
    }
    out.target_ok = out.source_ok && delay <= 32 && target && att.claimed_target == *target;

    std::optional<Root> head;
    for (Slot s = att.attested_slot + 1; s-- > 0;) {
        if (fx.roots[s]) {
            head = fx.roots[s];
            break;
        }
    }
    out.head_ok = out.target_ok && delay == 1 && head && att.claimed_head == *head;
    return out;
}

}  // namespace testutil
