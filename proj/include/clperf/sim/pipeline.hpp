#pragma once

#include <map>
#include <string>
#include <vector>

#include "clperf/record_log.hpp"
#include "clperf/rewards.hpp"
#include "clperf/sim/simulator.hpp"
#include "clperf/telemetry.hpp"

namespace clperf {

// Scores every completed epoch of a run through the regular evaluation
// pipeline: flags against the canonical view, achieved vs maximum reward,
// proposal and sync-duty bookkeeping.
inline std::vector<EpochPerformance> score_performances(const SimRun& run) {
    const ChainSpec& spec = run.config.spec;
    const Seed32 seed = seed32_from_u64(run.config.seed);
    const auto hosting = run.config.hosting_nodes();

    std::vector<EpochPerformance> out;
    const Epoch epochs = scored_epochs(run.config);
    out.reserve(epochs * run.config.validators);
    for (Epoch e = 0; e < epochs; ++e) {
        const EpochDuties duties = assign_duties(run.config.validators, e, seed, spec);
        for (ValidatorId v = 0; v < run.config.validators; ++v) {
            const AttestationOutcome& outcome = run.gt.attestations[e * run.config.validators + v];
            EpochPerformance perf;
            perf.validator = v;
            perf.epoch = e;
            perf.flags = evaluate_attestation(outcome.record, run.gt.canonical);
            const DutyAssignment& duty = duties.by_validator[v];
            perf.mer = max_epoch_reward(duty, e, run.config.weights, run.config.base_reward, spec);
            const bool sync_member = duty.in_sync_committee(e, spec);
            perf.sync_slots_assigned = sync_member ? spec.slots_per_epoch : 0;
            const auto signed_it = run.gt.sync_signed.find({e, v});
            perf.sync_slots_signed = signed_it != run.gt.sync_signed.end() ? signed_it->second : 0;
            perf.achieved = attestation_reward(perf.flags, run.config.weights, run.config.base_reward) +
                            perf.sync_slots_signed * sync_slot_reward(run.config.weights, run.config.base_reward);
            for (Slot s : duty.proposer_slots) {
                perf.proposals_assigned += 1;
                if (run.gt.proposal_fulfilled[s]) perf.proposals_fulfilled += 1;
            }
            const size_t host = hosting[v % hosting.size()];
            perf.label = SourceLabel{run.config.nodes[host].id, run.config.nodes[host].region,
                                     run.config.nodes[host].client};
            out.push_back(std::move(perf));
        }
    }
    return out;
}

// Run-length encodes each node's per-slot sync state.
inline std::vector<SyncSpan> sync_spans(const SimRun& run) {
    std::vector<SyncSpan> out;
    for (const NodeRunData& node : run.gt.nodes) {
        const auto& flags = node.out_of_sync_by_slot;
        if (flags.empty()) continue;
        Slot start = 0;
        bool state = flags[0];
        for (Slot s = 1; s < flags.size(); ++s) {
            if (flags[s] == state) continue;
            out.push_back(SyncSpan{node.label, start, s - 1, state});
            start = s;
            state = flags[s];
        }
        out.push_back(SyncSpan{node.label, start, static_cast<Slot>(flags.size() - 1), state});
    }
    return out;
}

struct IngestSummary {
    std::map<std::string, size_t> appended;
    std::vector<std::string> issues;

    size_t total() const {
        size_t n = 0;
        for (const auto& [kind, count] : appended) n += count;
        return n;
    }
};

// Writes a completed run into a record log in a fixed order, so identical
// runs produce byte-identical logs.
inline IngestSummary write_run_records(const SimRun& run, RecordLog& log) {
    IngestSummary summary;
    auto add = [&](const std::string& kind, json payload) {
        if (log.append(kind, std::move(payload))) summary.appended[kind] += 1;
    };

    for (Slot s = 0; s < run.config.duration_slots; ++s) {
        json j;
        j["gt"] = "chain_slot";
        j["slot"] = s;
        if (run.gt.canonical_blocks[s]) j["root"] = run.gt.canonical_blocks[s]->root.to_hex();
        else j["root"] = nullptr;
        add("ground_truth", std::move(j));
    }
    {
        json j;
        j["gt"] = "counts";
        j["events_generated"] = run.gt.telemetry_generated;
        j["events_dropped"] = run.gt.telemetry_dropped;
        j["proposals_assigned"] = run.config.duration_slots;
        std::uint64_t fulfilled = 0;
        for (bool ok : run.gt.proposal_fulfilled) fulfilled += ok ? 1 : 0;
        j["proposals_fulfilled"] = fulfilled;
        add("ground_truth", std::move(j));
    }

    for (const NodeRunData& node : run.gt.nodes)
        for (const ArrivalRecord& rec : node.arrivals) add("arrival", arrival_payload(rec));

    for (Slot s = 0; s < run.config.duration_slots; ++s) {
        if (run.gt.canonical_scores[s]) {
            BlockScoreRecord rec;
            rec.source = run.gt.canonical_blocks[s]->source;
            rec.slot = s;
            rec.canonical = true;
            rec.rank = 0;
            rec.score = *run.gt.canonical_scores[s];
            add("block_score", block_score_payload(rec));
        }
        std::vector<const NodeRunData*> by_rank;
        for (const NodeRunData& node : run.gt.nodes)
            if (node.candidate_score_by_slot[s]) by_rank.push_back(&node);
        std::sort(by_rank.begin(), by_rank.end(), [s](const NodeRunData* a, const NodeRunData* b) {
            return a->candidate_rank_by_slot[s] < b->candidate_rank_by_slot[s];
        });
        for (const NodeRunData* node : by_rank) {
            BlockScoreRecord rec;
            rec.source = node->label;
            rec.slot = s;
            rec.canonical = false;
            rec.rank = node->candidate_rank_by_slot[s];
            rec.score = *node->candidate_score_by_slot[s];
            add("block_score", block_score_payload(rec));
        }
    }

    for (const EpochPerformance& perf : score_performances(run)) add("epoch_performance", performance_payload(perf));
    for (const NodeRunData& node : run.gt.nodes)
        for (const ReorgEvent& ev : node.reorgs) add("reorg", reorg_payload(ev));
    for (const SyncSpan& span : sync_spans(run)) add("sync_span", sync_span_payload(span));

    return summary;
}

}  // namespace clperf
