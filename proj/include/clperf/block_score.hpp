#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clperf/attestation.hpp"
#include "clperf/chain_spec.hpp"
#include "clperf/duties.hpp"
#include "clperf/errors.hpp"
#include "clperf/rewards.hpp"
#include "clperf/slot_math.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Fixed score bonuses per slashing included in a block. The reward formulas
// the score is derived from do not weight slashings, so these are calibration
// constants, sized so one proposer slashing outweighs any single vote.
inline constexpr double kAttesterSlashingScore = 0.0625;
inline constexpr double kProposerSlashingScore = 0.5;

// One aggregated attestation carried by a block: which validators voted, and
// which flags that vote earns given the block it is included in (inclusion
// delay is already folded in by whoever built the summary).
struct AggregateAttestation {
    Slot attested_slot = 0;
    std::uint32_t committee_index = 0;
    std::vector<ValidatorId> participants;
    FlagVector claims;
};

// A proposed or observed block, reduced to what scoring needs.
struct BlockSummary {
    Slot slot = 0;
    ValidatorId proposer = 0;
    Root parent_root{};
    Root root{};
    std::vector<AggregateAttestation> aggregates;
    std::uint32_t sync_participation = 0;
    std::uint32_t attester_slashings = 0;
    std::uint32_t proposer_slashings = 0;
    SourceLabel source;
};

inline void validate_block(const BlockSummary& block, const ChainSpec& spec, const EpochDuties* duties = nullptr) {
    if (block.aggregates.size() > spec.max_aggregations_per_block)
        throw DataError("block at slot " + std::to_string(block.slot) + " carries " +
                        std::to_string(block.aggregates.size()) + " aggregates, over the limit of " +
                        std::to_string(spec.max_aggregations_per_block));
    if (block.sync_participation > spec.sync_committee_size)
        throw DataError("sync participation exceeds committee size");
    for (const auto& agg : block.aggregates) {
        if (agg.attested_slot >= block.slot)
            throw DataError("aggregate attests slot " + std::to_string(agg.attested_slot) +
                            " not before block slot " + std::to_string(block.slot));
        if (duties && epoch_of(agg.attested_slot, spec) == duties->epoch) {
            const auto* members = duties->committee_at(agg.attested_slot, agg.committee_index, spec);
            if (!members)
                throw DataError("aggregate references unknown committee " + std::to_string(agg.committee_index) +
                                " at slot " + std::to_string(agg.attested_slot));
            for (ValidatorId v : agg.participants)
                if (std::find(members->begin(), members->end(), v) == members->end())
                    throw DataError("validator " + std::to_string(v) + " not in committee " +
                                    std::to_string(agg.committee_index) + " at slot " +
                                    std::to_string(agg.attested_slot));
        }
    }
}

// Which flags each validator already has on chain, per epoch. Entries only
// accumulate inside an epoch's inclusion window and expire once no new vote
// for that epoch could still be included.
class InclusionIndex {
public:
    enum Flag : std::uint8_t { source = 1, target = 2, head = 4 };

    static std::uint8_t flag_bits(const FlagVector& claims) {
        return static_cast<std::uint8_t>((claims.source_ok ? source : 0) | (claims.target_ok ? target : 0) |
                                         (claims.head_ok ? head : 0));
    }

    bool has(Epoch epoch, ValidatorId validator, Flag flag) const {
        const auto it = flags_.find({epoch, validator});
        return it != flags_.end() && (it->second & flag) != 0;
    }

    std::uint8_t bits(Epoch epoch, ValidatorId validator) const {
        const auto it = flags_.find({epoch, validator});
        return it == flags_.end() ? 0 : it->second;
    }

    // Marks every flag the block includes, then expires epochs whose
    // inclusion window has passed. Idempotent.
    void apply(const BlockSummary& block, const ChainSpec& spec) {
        validate_block(block, spec);
        for (const auto& agg : block.aggregates) {
            const std::uint8_t add = flag_bits(agg.claims);
            if (add == 0) continue;
            const Epoch epoch = epoch_of(agg.attested_slot, spec);
            for (ValidatorId v : agg.participants) flags_[{epoch, v}] |= add;
        }
        const Epoch block_epoch = epoch_of(block.slot, spec);
        if (block_epoch >= 2) expire_before(block_epoch - 1);
    }

    void expire_before(Epoch epoch) {
        flags_.erase(flags_.begin(), flags_.lower_bound({epoch, 0}));
    }

    size_t entries() const { return flags_.size(); }

    bool operator==(const InclusionIndex&) const = default;

private:
    std::map<std::pair<Epoch, ValidatorId>, std::uint8_t> flags_;
};

inline InclusionIndex update_index(InclusionIndex index, const BlockSummary& block, const ChainSpec& spec) {
    index.apply(block, spec);
    return index;
}

// A block's synthetic value: every newly included flag weighted like the
// rewards formula with the base reward factored out, plus sync participation
// and slashing bonuses.
struct BlockScore {
    std::uint32_t new_votes = 0;  // validators contributing at least one new flag
    std::uint32_t new_source = 0;
    std::uint32_t new_target = 0;
    std::uint32_t new_head = 0;
    std::uint32_t sync_bits = 0;
    std::uint32_t attester_slashings = 0;
    std::uint32_t proposer_slashings = 0;
    double score = 0;
};

inline BlockScore score_block(const BlockSummary& block, const InclusionIndex& index, const RewardWeights& weights,
                              const ChainSpec& spec) {
    validate_block(block, spec);

    // Flags counted once per validator even when several aggregates in this
    // block overlap, so aggregate order cannot change the result.
    std::map<std::pair<Epoch, ValidatorId>, std::uint8_t> newly;
    for (const auto& agg : block.aggregates) {
        const std::uint8_t claimed = InclusionIndex::flag_bits(agg.claims);
        if (claimed == 0) continue;
        const Epoch epoch = epoch_of(agg.attested_slot, spec);
        for (ValidatorId v : agg.participants) {
            const std::uint8_t fresh = static_cast<std::uint8_t>(claimed & ~index.bits(epoch, v));
            if (fresh != 0) newly[{epoch, v}] |= fresh;
        }
    }

    BlockScore result;
    std::uint64_t flag_weight = 0;
    for (const auto& [who, bits] : newly) {
        result.new_votes += 1;
        if (bits & InclusionIndex::source) {
            result.new_source += 1;
            flag_weight += weights.w_source;
        }
        if (bits & InclusionIndex::target) {
            result.new_target += 1;
            flag_weight += weights.w_target;
        }
        if (bits & InclusionIndex::head) {
            result.new_head += 1;
            flag_weight += weights.w_head;
        }
    }

    result.sync_bits = block.sync_participation;
    result.attester_slashings = block.attester_slashings;
    result.proposer_slashings = block.proposer_slashings;

    result.score = static_cast<double>(flag_weight) / static_cast<double>(weights.denominator) +
                   static_cast<double>(block.sync_participation) * static_cast<double>(weights.w_sync) /
                       (static_cast<double>(weights.denominator) * static_cast<double>(spec.sync_committee_size)) +
                   kAttesterSlashingScore * block.attester_slashings +
                   kProposerSlashingScore * block.proposer_slashings;
    return result;
}

struct RankedCandidate {
    BlockSummary block;
    BlockScore score;
    std::uint32_t rank = 0;  // 1-based
};

// Ranks one slot's candidate blocks against a shared index snapshot,
// best first. Ties fall back to new-vote count, then to the node label.
// An empty candidate set yields an empty ranking; the caller records the
// slot as out of sync for that node.
inline std::vector<RankedCandidate> compare_candidates(std::span<const BlockSummary> candidates,
                                                       const InclusionIndex& index, const RewardWeights& weights,
                                                       const ChainSpec& spec) {
    if (candidates.empty()) return {};
    const Slot slot = candidates.front().slot;
    std::vector<RankedCandidate> ranked;
    ranked.reserve(candidates.size());
    for (const auto& candidate : candidates) {
        if (candidate.slot != slot) throw DataError("candidates to compare must share a slot");
        ranked.push_back(RankedCandidate{candidate, score_block(candidate, index, weights, spec), 0});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score.score != b.score.score) return a.score.score > b.score.score;
        if (a.score.new_votes != b.score.new_votes) return a.score.new_votes > b.score.new_votes;
        return a.block.source.node < b.block.source.node;
    });
    for (size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = static_cast<std::uint32_t>(i + 1);
    return ranked;
}

}  // namespace clperf
