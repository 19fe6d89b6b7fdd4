#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "clperf/attestation.hpp"
#include "clperf/block_score.hpp"
#include "clperf/chain_view.hpp"
#include "clperf/duties.hpp"
#include "clperf/rewards.hpp"
#include "clperf/rng.hpp"
#include "clperf/sim/scenario.hpp"
#include "clperf/slot_math.hpp"
#include "clperf/telemetry.hpp"
#include "clperf/types.hpp"

namespace clperf {

// What one attester broadcast: its perception of source, target and head at
// the attestation deadline.
struct ClaimTuple {
    Checkpoint source;
    Checkpoint target;
    Root head{};

    auto tie() const { return std::tie(source.epoch, source.root, target.epoch, target.root, head); }
    bool operator<(const ClaimTuple& other) const { return tie() < other.tie(); }
    bool operator==(const ClaimTuple& other) const { return tie() == other.tie(); }
};

// Per-node API event as the node would stream it; `dropped` marks frames
// suppressed by a stream_drop fault window.
struct StreamEventRec {
    WallMs emit_ms = 0;  // node-local wall clock
    ArrivalKind kind = ArrivalKind::block;
    Slot slot = 0;
    Root root{};
    std::uint32_t depth = 0;
    bool dropped = false;
};

// (send, receive, processed) times of every simulated message delivery.
struct MessageTimes {
    std::uint64_t message_id = 0;
    int src_node = 0;
    int dst_node = 0;
    WallMs send_ms = 0;
    WallMs receive_ms = 0;
    WallMs processed_ms = 0;
    bool delivered = true;  // false when the destination was down
};

struct AttestationOutcome {
    AttestationRecord record;
    int node = -1;         // hosting node index
    bool produced = false;  // false when the node was down at the deadline
};

struct NodeRunData {
    SourceLabel label;
    std::vector<ArrivalRecord> arrivals;  // telemetry that survived fault windows
    std::vector<StreamEventRec> stream;   // full stream, dropped frames flagged
    std::vector<ReorgEvent> reorgs;
    std::vector<bool> out_of_sync_by_slot;
    std::vector<std::optional<BlockSummary>> candidate_by_slot;
    std::vector<std::optional<BlockScore>> candidate_score_by_slot;
    std::vector<std::uint32_t> candidate_rank_by_slot;
};

struct GroundTruth {
    ChainView canonical;
    std::vector<ValidatorId> proposer_by_slot;
    std::vector<bool> proposal_fulfilled;
    std::vector<std::optional<BlockSummary>> canonical_blocks;
    std::vector<std::optional<BlockScore>> canonical_scores;
    // One entry per (epoch, validator): index epoch * validators + validator.
    std::vector<AttestationOutcome> attestations;
    std::map<std::pair<Epoch, ValidatorId>, std::uint32_t> sync_signed;
    std::vector<std::uint32_t> sync_ok_by_slot;
    std::vector<MessageTimes> messages;
    std::vector<NodeRunData> nodes;
    std::uint64_t telemetry_generated = 0;
    std::uint64_t telemetry_dropped = 0;
};

struct SimRun {
    SimConfig config;
    GroundTruth gt;
};

// Epochs whose inclusion window fits inside the run; only these are scored so
// boundary truncation never masquerades as missed duties.
inline Epoch scored_epochs(const SimConfig& config) {
    const Epoch total = config.duration_slots / config.spec.slots_per_epoch;
    return total >= 2 ? total - 1 : 0;
}

namespace simdetail {

struct Payload {
    enum class Kind { block, vote, aggregate } kind = Kind::block;
    Slot slot = 0;               // block slot or attested slot
    std::uint32_t committee = 0;
    ValidatorId validator = 0;   // votes only
    ClaimTuple claims;
    std::vector<ValidatorId> participants;  // aggregates only
};

struct Event {
    WallMs t = 0;
    int rank = 0;  // 0 = fault edge, 1 = delivery, 2 = duty action
    int node = 0;
    std::uint64_t seq = 0;
    enum class Type { fault_on, fault_off, deliver, slot_start, attest, aggregate } type = Type::slot_start;
    size_t payload = 0;  // message index, slot, or fault index

    bool operator>(const Event& other) const {
        return std::tie(t, rank, node, seq) > std::tie(other.t, other.rank, other.node, other.seq);
    }
};

struct PoolEntry {
    size_t payload = 0;
    WallMs arrived = 0;
    std::uint64_t seq = 0;
};

struct NodeState {
    int idx = 0;
    const NodeSpec* spec = nullptr;
    SourceLabel label;
    int peer_count = 50;

    bool down = false;
    bool stream_drop = false;
    WallMs skew = 0;

    std::vector<std::optional<WallMs>> received_ms;  // per slot: local processed time
    std::uint64_t received_count = 0;
    std::optional<Slot> head_slot;
    std::map<Epoch, std::pair<Slot, Root>> first_of_epoch;  // lowest received slot per epoch

    std::map<std::pair<Slot, std::uint32_t>, std::map<ClaimTuple, std::vector<ValidatorId>>> votes;
    std::vector<PoolEntry> agg_pool;
    std::set<std::tuple<Slot, std::uint32_t, ClaimTuple, std::vector<ValidatorId>>> agg_seen;
    InclusionIndex local_index;

    std::vector<WallMs> frozen_at;                 // -1 until the deadline freeze ran
    std::vector<std::optional<Root>> frozen_root;  // head at the freeze, if any
};

class Simulator {
public:
    explicit Simulator(const SimConfig& config) : cfg_(config), spec_(config.spec) {
        cfg_.validate();
        gt_.canonical = ChainView(spec_);
    }

    SimRun run() {
        setup();
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            dispatch(ev);
        }
        return SimRun{cfg_, std::move(gt_)};
    }

private:
    // --- setup -----------------------------------------------------------

    void setup() {
        const size_t slots = cfg_.duration_slots;
        const size_t node_count = cfg_.nodes.size();

        nodes_.resize(node_count);
        gt_.nodes.resize(node_count);
        for (size_t i = 0; i < node_count; ++i) {
            NodeState& node = nodes_[i];
            node.idx = static_cast<int>(i);
            node.spec = &cfg_.nodes[i];
            node.label = SourceLabel{cfg_.nodes[i].id, cfg_.nodes[i].region, cfg_.nodes[i].client};
            node.peer_count = cfg_.node_peer_count(cfg_.nodes[i]);
            node.received_ms.resize(slots);
            node.frozen_at.assign(slots, -1);
            node.frozen_root.resize(slots);
            gt_.nodes[i].label = node.label;
            gt_.nodes[i].out_of_sync_by_slot.assign(slots, false);
            gt_.nodes[i].candidate_by_slot.resize(slots);
            gt_.nodes[i].candidate_score_by_slot.resize(slots);
            gt_.nodes[i].candidate_rank_by_slot.assign(slots, 0);
        }

        hosting_ = cfg_.hosting_nodes();
        duty_seed_ = seed32_from_u64(cfg_.seed);

        gt_.proposer_by_slot.assign(slots, 0);
        gt_.proposal_fulfilled.assign(slots, false);
        gt_.canonical_blocks.resize(slots);
        gt_.canonical_scores.resize(slots);
        gt_.sync_ok_by_slot.assign(slots, 0);
        justified_by_epoch_.assign(cfg_.duration_slots / spec_.slots_per_epoch + 2, Checkpoint{0, Root{}});

        for (Slot s = 0; s < cfg_.duration_slots; ++s)
            push_event(slot_start_ms(s, spec_), 2, -1, Event::Type::slot_start, s);

        for (size_t f = 0; f < cfg_.faults.size(); ++f) {
            const FaultSpec& fault = cfg_.faults[f];
            push_event(slot_start_ms(fault.from_slot, spec_), 0, node_index(fault.node), Event::Type::fault_on, f);
            push_event(slot_start_ms(fault.to_slot + 1, spec_), 0, node_index(fault.node), Event::Type::fault_off, f);
        }
    }

    int node_index(const std::string& id) const {
        for (size_t i = 0; i < cfg_.nodes.size(); ++i)
            if (cfg_.nodes[i].id == id) return static_cast<int>(i);
        throw ConfigError("unknown node id: " + id);
    }

    void push_event(WallMs t, int rank, int node, Event::Type type, size_t payload) {
        queue_.push(Event{t, rank, node, next_seq_++, type, payload});
    }

    // --- duties ----------------------------------------------------------

    const EpochDuties& duties(Epoch epoch) {
        auto it = duties_cache_.find(epoch);
        if (it == duties_cache_.end())
            it = duties_cache_.emplace(epoch, assign_duties(cfg_.validators, epoch, duty_seed_, spec_)).first;
        return it->second;
    }

    int host_of(ValidatorId v) const { return static_cast<int>(hosting_[v % hosting_.size()]); }

    // --- keyed sampling ---------------------------------------------------

    WallMs sample_latency(int src, int dst, std::uint64_t message_id) const {
        const LatencyModel& model = cfg_.edge(cfg_.nodes[src].region, cfg_.nodes[dst].region);
        const double ms = keyed::lognormal_ms(mix64({cfg_.seed, 0x1a7ull, message_id}), model.median_ms, model.sigma);
        return static_cast<WallMs>(std::llround(ms));
    }

    WallMs sample_processing(const NodeState& node, std::uint64_t message_id) const {
        const double jitter = keyed::nonneg_normal(mix64({cfg_.seed, 0x99ull, message_id}), node.spec->jitter_ms);
        const double load = static_cast<double>(node.peer_count) / 50.0;
        return static_cast<WallMs>(std::llround((node.spec->processing_ms + jitter) * load));
    }

    // --- claim construction (node-local views) ----------------------------

    Checkpoint node_justified(const NodeState& node, Epoch epoch) const {
        for (Epoch e = epoch; e > 0; --e) {
            const auto it = node.first_of_epoch.find(e - 1);
            if (it != node.first_of_epoch.end()) return Checkpoint{e - 1, it->second.second};
        }
        return Checkpoint{0, Root{}};
    }

    ClaimTuple node_claims(const NodeState& node, Slot slot) const {
        const Epoch epoch = epoch_of(slot, spec_);
        ClaimTuple claims;
        claims.source = node_justified(node, epoch);
        if (node.head_slot) claims.head = gt_.canonical_blocks[*node.head_slot]->root;
        const auto it = node.first_of_epoch.find(epoch);
        if (it != node.first_of_epoch.end()) claims.target = Checkpoint{epoch, it->second.second};
        else claims.target = Checkpoint{epoch, claims.head};
        return claims;
    }

    // --- dispatch ----------------------------------------------------------

    void dispatch(const Event& ev) {
        switch (ev.type) {
            case Event::Type::fault_on: fault_edge(ev, true); break;
            case Event::Type::fault_off: fault_edge(ev, false); break;
            case Event::Type::deliver: deliver(ev); break;
            case Event::Type::slot_start: slot_start(ev.payload, ev.t); break;
            case Event::Type::attest: attest(ev.node, ev.payload, ev.t); break;
            case Event::Type::aggregate: aggregate(ev.node, ev.payload, ev.t); break;
        }
    }

    // --- faults -------------------------------------------------------------

    void fault_edge(const Event& ev, bool on) {
        const FaultSpec& fault = cfg_.faults[ev.payload];
        NodeState& node = nodes_[ev.node];
        switch (fault.kind) {
            case FaultKind::node_down:
                node.down = on;
                if (!on) resync(node, ev.t);
                break;
            case FaultKind::clock_skew:
                node.skew = on ? fault.skew_ms : 0;
                break;
            case FaultKind::stream_drop:
                node.stream_drop = on;
                break;
        }
    }

    // Wake-up resync: the node adopts the canonical chain wholesale. No
    // arrival telemetry is emitted; these blocks come from sync, not gossip.
    void resync(NodeState& node, WallMs now) {
        for (Slot s = 0; s < gt_.canonical.size(); ++s) {
            if (!gt_.canonical_blocks[s] || node.received_ms[s]) continue;
            node.received_ms[s] = now;
            node.received_count += 1;
            note_first_of_epoch(node, s, gt_.canonical_blocks[s]->root);
            node.local_index.apply(*gt_.canonical_blocks[s], spec_);
            if (!node.head_slot || s > *node.head_slot) node.head_slot = s;
        }
    }

    void note_first_of_epoch(NodeState& node, Slot slot, const Root& root) {
        const Epoch epoch = epoch_of(slot, spec_);
        const auto it = node.first_of_epoch.find(epoch);
        if (it == node.first_of_epoch.end() || slot < it->second.first) node.first_of_epoch[epoch] = {slot, root};
    }

    // --- telemetry -----------------------------------------------------------

    void emit_stream(NodeState& node, ArrivalKind kind, Slot slot, const Root& root, std::uint32_t depth, WallMs now) {
        const WallMs local_now = now + node.skew;
        gt_.nodes[node.idx].stream.push_back(StreamEventRec{local_now, kind, slot, root, depth, node.stream_drop});

        gt_.telemetry_generated += 1;
        if (node.stream_drop) {
            gt_.telemetry_dropped += 1;
            return;
        }
        const WallMs start = slot_start_ms(slot, spec_);
        const WallMs raw = local_now - start;
        ArrivalRecord rec;
        rec.source = node.label;
        rec.slot = slot;
        rec.kind = kind;
        rec.arrival_offset_ms = std::max<WallMs>(raw, 0);
        rec.skew_flagged = raw < 0;
        gt_.nodes[node.idx].arrivals.push_back(rec);
    }

    // --- deliveries ----------------------------------------------------------

    void broadcast(int src, size_t payload_idx, WallMs send_ms) {
        for (size_t dst = 0; dst < nodes_.size(); ++dst) {
            if (static_cast<int>(dst) == src) continue;
            const std::uint64_t message_id = next_message_id_++;
            const WallMs receive = send_ms + sample_latency(src, static_cast<int>(dst), message_id);
            const WallMs processed = receive + sample_processing(nodes_[dst], message_id);
            gt_.messages.push_back(MessageTimes{message_id, src, static_cast<int>(dst), send_ms, receive, processed, true});
            const size_t message_index = gt_.messages.size() - 1;
            message_payload_.push_back(payload_idx);
            push_event(processed, 1, static_cast<int>(dst), Event::Type::deliver, message_index);
        }
    }

    void deliver(const Event& ev) {
        MessageTimes& times = gt_.messages[ev.payload];
        NodeState& node = nodes_[ev.node];
        if (node.down) {
            times.delivered = false;
            return;
        }
        const Payload& payload = payloads_[message_payload_[ev.payload]];
        switch (payload.kind) {
            case Payload::Kind::block: deliver_block(node, payload, ev.t); break;
            case Payload::Kind::vote:
                node.votes[{payload.slot, payload.committee}][payload.claims].push_back(payload.validator);
                break;
            case Payload::Kind::aggregate: {
                auto key = std::make_tuple(payload.slot, payload.committee, payload.claims, payload.participants);
                if (node.agg_seen.insert(std::move(key)).second)
                    node.agg_pool.push_back(PoolEntry{message_payload_[ev.payload], ev.t, ev.seq});
                break;
            }
        }
    }

    void deliver_block(NodeState& node, const Payload& payload, WallMs now) {
        const Slot slot = payload.slot;
        if (node.received_ms[slot]) return;  // already resynced
        const BlockSummary& block = *gt_.canonical_blocks[slot];

        node.received_ms[slot] = now;
        node.received_count += 1;
        note_first_of_epoch(node, slot, block.root);
        node.local_index.apply(block, spec_);

        // A block landing after this node already froze a different head for
        // its slot displaces that head: a node-local reorganization.
        if (node.frozen_at[slot] >= 0 && node.frozen_root[slot] && *node.frozen_root[slot] != block.root) {
            gt_.nodes[node.idx].reorgs.push_back(ReorgEvent{node.label, slot, 1});
            emit_stream(node, ArrivalKind::reorg, slot, block.root, 1, now);
        }

        emit_stream(node, ArrivalKind::block, slot, block.root, 0, now);
        if (!node.head_slot || slot > *node.head_slot) {
            node.head_slot = slot;
            emit_stream(node, ArrivalKind::head, slot, block.root, 0, now);
        }
    }

    // --- slot start: sync sampling, candidates, canonical proposal ------------

    void slot_start(Slot slot, WallMs now) {
        const Epoch epoch = epoch_of(slot, spec_);
        if (slot_in_epoch(slot, spec_) == 0) begin_epoch(epoch);
        slot_eval_cache_.clear();

        // Out-of-sync sampling against the canonical chain so far.
        const auto ref = gt_.canonical.last_block_before(slot);
        for (NodeState& node : nodes_) {
            bool out = node.down;
            if (!out && ref) {
                const std::int64_t local = node.head_slot ? static_cast<std::int64_t>(*node.head_slot) : -1;
                out = static_cast<std::int64_t>(*ref) - local > 2;
            }
            gt_.nodes[node.idx].out_of_sync_by_slot[slot] = out;
        }

        // Duty actions for this slot, shifted by each node's current skew.
        for (NodeState& node : nodes_) {
            push_event(now + spec_.attestation_deadline_ms() - node.skew, 2, node.idx, Event::Type::attest, slot);
            push_event(now + spec_.aggregation_deadline_ms() - node.skew, 2, node.idx, Event::Type::aggregate, slot);
        }

        if (cfg_.candidates) build_candidates(slot);
        canonical_proposal(slot, now);
    }

    void begin_epoch(Epoch epoch) {
        const EpochDuties& d = duties(epoch);
        gt_.attestations.resize((epoch + 1) * cfg_.validators);
        for (ValidatorId v = 0; v < cfg_.validators; ++v) {
            AttestationOutcome& outcome = gt_.attestations[epoch * cfg_.validators + v];
            outcome.record.validator = v;
            outcome.record.attested_slot = d.by_validator[v].attestation_slot;
            outcome.node = host_of(v);
        }
        if (epoch >= 1) {
            const auto target = gt_.canonical.target_checkpoint(epoch - 1);
            justified_by_epoch_[epoch] = target ? *target : justified_by_epoch_[epoch - 1];
        }
        if (duties_cache_.size() > 3) duties_cache_.erase(duties_cache_.begin());
    }

    FlagVector claim_flags(const ClaimTuple& claims, Slot attested, Slot inclusion) {
        AttestationRecord rec;
        rec.attested_slot = attested;
        rec.claimed_source = claims.source;
        rec.claimed_target = claims.target;
        rec.claimed_head = claims.head;
        rec.inclusion_slot = inclusion;
        return evaluate_attestation(rec, gt_.canonical);
    }

    const FlagVector& cached_claim_flags(size_t payload_idx, Slot inclusion) {
        auto it = slot_eval_cache_.find(payload_idx);
        if (it == slot_eval_cache_.end()) {
            const Payload& p = payloads_[payload_idx];
            it = slot_eval_cache_.emplace(payload_idx, claim_flags(p.claims, p.slot, inclusion)).first;
        }
        return it->second;
    }

    std::uint64_t marginal_weight(const Payload& payload, const FlagVector& flags, const InclusionIndex& index,
                                  const std::map<std::pair<Epoch, ValidatorId>, std::uint8_t>& picked) const {
        const std::uint8_t claimed = InclusionIndex::flag_bits(flags);
        if (claimed == 0) return 0;
        const Epoch epoch = epoch_of(payload.slot, spec_);
        std::uint64_t weight = 0;
        for (ValidatorId v : payload.participants) {
            std::uint8_t fresh = static_cast<std::uint8_t>(claimed & ~index.bits(epoch, v));
            const auto it = picked.find({epoch, v});
            if (it != picked.end()) fresh = static_cast<std::uint8_t>(fresh & ~it->second);
            if (fresh & InclusionIndex::source) weight += cfg_.weights.w_source;
            if (fresh & InclusionIndex::target) weight += cfg_.weights.w_target;
            if (fresh & InclusionIndex::head) weight += cfg_.weights.w_head;
        }
        return weight;
    }

    // Greedy aggregate packing with lazy re-evaluation; marginal gains only
    // shrink as picks accumulate, so a popped entry whose recomputed gain
    // still tops the heap is safe to take.
    std::vector<AggregateAttestation> pack_aggregates(NodeState& node, Slot slot, const InclusionIndex& index) {
        // Prune: too old to earn anything, or already fully included.
        std::vector<PoolEntry> kept;
        kept.reserve(node.agg_pool.size());
        for (const PoolEntry& entry : node.agg_pool) {
            const Payload& p = payloads_[entry.payload];
            if (p.slot + kTargetTimelinessSlots < slot) continue;
            if (marginal_weight(p, cached_claim_flags(entry.payload, slot), node.local_index, {}) == 0 &&
                fully_included(p, node.local_index))
                continue;
            kept.push_back(entry);
        }
        node.agg_pool = std::move(kept);

        struct HeapItem {
            std::uint64_t gain;
            WallMs neg_arrived;
            std::uint64_t neg_seq;
            size_t pool_idx;
            bool operator<(const HeapItem& other) const {
                return std::tie(gain, neg_arrived, neg_seq) < std::tie(other.gain, other.neg_arrived, other.neg_seq);
            }
        };
        std::priority_queue<HeapItem> heap;
        for (size_t i = 0; i < node.agg_pool.size(); ++i) {
            const PoolEntry& entry = node.agg_pool[i];
            const std::uint64_t gain =
                marginal_weight(payloads_[entry.payload], cached_claim_flags(entry.payload, slot), index, {});
            if (gain > 0) heap.push(HeapItem{gain, -entry.arrived, ~entry.seq, i});
        }

        std::vector<AggregateAttestation> out;
        std::map<std::pair<Epoch, ValidatorId>, std::uint8_t> picked;
        while (!heap.empty() && out.size() < cfg_.spec.max_aggregations_per_block) {
            HeapItem item = heap.top();
            heap.pop();
            const PoolEntry& entry = node.agg_pool[item.pool_idx];
            const Payload& payload = payloads_[entry.payload];
            const FlagVector& flags = cached_claim_flags(entry.payload, slot);
            const std::uint64_t gain = marginal_weight(payload, flags, index, picked);
            if (gain == 0) continue;
            if (!heap.empty() && gain < heap.top().gain) {
                item.gain = gain;
                heap.push(item);
                continue;
            }
            AggregateAttestation agg;
            agg.attested_slot = payload.slot;
            agg.committee_index = payload.committee;
            agg.participants = payload.participants;
            agg.claims = flags;
            out.push_back(std::move(agg));
            const std::uint8_t claimed = InclusionIndex::flag_bits(flags);
            const Epoch epoch = epoch_of(payload.slot, spec_);
            for (ValidatorId v : payload.participants) picked[{epoch, v}] |= claimed;
        }
        return out;
    }

    bool fully_included(const Payload& payload, const InclusionIndex& index) const {
        const Epoch epoch = epoch_of(payload.slot, spec_);
        for (ValidatorId v : payload.participants)
            if ((index.bits(epoch, v) & (InclusionIndex::source | InclusionIndex::target | InclusionIndex::head)) !=
                (InclusionIndex::source | InclusionIndex::target | InclusionIndex::head))
                return false;
        return true;
    }

    void build_candidates(Slot slot) {
        std::vector<BlockSummary> produced;
        std::vector<int> producer;
        for (NodeState& node : nodes_) {
            if (node.down || gt_.nodes[node.idx].out_of_sync_by_slot[slot]) continue;
            BlockSummary candidate;
            candidate.slot = slot;
            candidate.proposer = 0;
            candidate.root = Root::derive(mix64({cfg_.seed, 0xca4dull, slot}), static_cast<std::uint64_t>(node.idx));
            candidate.parent_root = node.head_slot ? gt_.canonical_blocks[*node.head_slot]->root : Root{};
            candidate.aggregates = pack_aggregates(node, slot, node.local_index);
            candidate.sync_participation = slot > 0 ? gt_.sync_ok_by_slot[slot - 1] : 0;
            candidate.source = node.label;
            produced.push_back(candidate);
            producer.push_back(node.idx);
        }
        const auto ranked = compare_candidates(produced, canonical_index_, cfg_.weights, spec_);
        for (const RankedCandidate& rc : ranked) {
            for (size_t i = 0; i < produced.size(); ++i) {
                if (produced[i].source.node != rc.block.source.node) continue;
                NodeRunData& data = gt_.nodes[producer[i]];
                data.candidate_by_slot[slot] = rc.block;
                data.candidate_score_by_slot[slot] = rc.score;
                data.candidate_rank_by_slot[slot] = rc.rank;
                break;
            }
        }
    }

    void canonical_proposal(Slot slot, WallMs now) {
        const Epoch epoch = epoch_of(slot, spec_);
        const EpochDuties& d = duties(epoch);
        const ValidatorId proposer = d.proposer_by_slot[slot_in_epoch(slot, spec_)];
        gt_.proposer_by_slot[slot] = proposer;
        NodeState& node = nodes_[host_of(proposer)];

        const Checkpoint justified = justified_by_epoch_[epoch];
        const bool ready = !node.down && node.received_count == canonical_count_;
        if (!ready) {
            gt_.canonical.push_empty(slot, justified);
            return;
        }

        BlockSummary block;
        block.slot = slot;
        block.proposer = proposer;
        block.root = Root::derive(mix64({cfg_.seed, 0xb10cull}), slot);
        block.parent_root = last_canonical_root_;
        block.aggregates = pack_aggregates(node, slot, canonical_index_);
        block.sync_participation = slot > 0 ? gt_.sync_ok_by_slot[slot - 1] : 0;
        block.source = node.label;

        gt_.canonical_scores[slot] = score_block(block, canonical_index_, cfg_.weights, spec_);
        canonical_index_.apply(block, spec_);

        // First effective inclusion per attestation.
        for (const auto& agg : block.aggregates) {
            const Epoch att_epoch = epoch_of(agg.attested_slot, spec_);
            for (ValidatorId v : agg.participants) {
                AttestationOutcome& outcome = gt_.attestations[att_epoch * cfg_.validators + v];
                if (outcome.produced && !outcome.record.inclusion_slot) outcome.record.inclusion_slot = slot;
            }
        }

        gt_.canonical.push_block(slot, block.root, now, justified);
        gt_.canonical_blocks[slot] = block;
        gt_.proposal_fulfilled[slot] = true;
        canonical_count_ += 1;
        last_canonical_root_ = block.root;
        if (canonical_first_of_epoch_.find(epoch) == canonical_first_of_epoch_.end())
            canonical_first_of_epoch_[epoch] = {slot, block.root};

        // The proposer's own node has the block immediately.
        node.received_ms[slot] = now;
        node.received_count += 1;
        note_first_of_epoch(node, slot, block.root);
        node.local_index.apply(block, spec_);
        if (!node.head_slot || slot > *node.head_slot) node.head_slot = slot;
        emit_stream(node, ArrivalKind::block, slot, block.root, 0, now);
        emit_stream(node, ArrivalKind::head, slot, block.root, 0, now);

        payloads_.push_back(Payload{Payload::Kind::block, slot, 0, 0, {}, {}});
        broadcast(node.idx, payloads_.size() - 1, now);
    }

    // --- attest / aggregate ----------------------------------------------------

    void attest(int node_idx, Slot slot, WallMs now) {
        NodeState& node = nodes_[node_idx];
        if (node.down) return;

        node.frozen_at[slot] = now;
        if (node.head_slot) node.frozen_root[slot] = gt_.canonical_blocks[*node.head_slot]->root;

        const Epoch epoch = epoch_of(slot, spec_);
        const EpochDuties& d = duties(epoch);
        const ClaimTuple claims = node_claims(node, slot);

        // Hosted attesters of this slot broadcast their vote.
        const auto& slot_committees = d.committees[slot_in_epoch(slot, spec_)];
        for (std::uint32_t c = 0; c < slot_committees.size(); ++c) {
            for (ValidatorId v : slot_committees[c]) {
                if (host_of(v) != node_idx) continue;
                AttestationOutcome& outcome = gt_.attestations[epoch * cfg_.validators + v];
                outcome.produced = true;
                outcome.record.claimed_source = claims.source;
                outcome.record.claimed_target = claims.target;
                outcome.record.claimed_head = claims.head;

                payloads_.push_back(Payload{Payload::Kind::vote, slot, c, v, claims, {}});
                const size_t payload_idx = payloads_.size() - 1;
                node.votes[{slot, c}][claims].push_back(v);  // self-delivery
                broadcast(node_idx, payload_idx, now);
            }
        }

        // Hosted sync-committee members sign the head they see; correct when
        // it matches the canonical head at the protocol deadline.
        const Root canonical_head = gt_.canonical.head_at(slot, spec_.attestation_deadline_ms());
        const bool head_matches = node.head_slot && gt_.canonical_blocks[*node.head_slot]->root == canonical_head;
        for (ValidatorId m : d.sync_committee) {
            if (host_of(m) != node_idx) continue;
            if (head_matches) {
                gt_.sync_signed[{epoch, m}] += 1;
                gt_.sync_ok_by_slot[slot] += 1;
            }
        }
    }

    void aggregate(int node_idx, Slot slot, WallMs now) {
        NodeState& node = nodes_[node_idx];
        if (node.down) return;

        const Epoch epoch = epoch_of(slot, spec_);
        const EpochDuties& d = duties(epoch);

        // Committees with at least one hosted aggregator; one emission per
        // committee and distinct claim group regardless of how many local
        // aggregators share it.
        std::set<std::uint32_t> committees;
        const auto& slot_committees = d.committees[slot_in_epoch(slot, spec_)];
        for (std::uint32_t c = 0; c < slot_committees.size(); ++c)
            for (ValidatorId v : slot_committees[c])
                if (host_of(v) == node_idx && d.by_validator[v].is_aggregator) committees.insert(c);

        for (std::uint32_t c : committees) {
            const auto it = node.votes.find({slot, c});
            if (it == node.votes.end()) continue;
            for (const auto& [claims, voters] : it->second) {
                std::vector<ValidatorId> participants = voters;
                std::sort(participants.begin(), participants.end());
                participants.erase(std::unique(participants.begin(), participants.end()), participants.end());

                payloads_.push_back(Payload{Payload::Kind::aggregate, slot, c, 0, claims, participants});
                const size_t payload_idx = payloads_.size() - 1;
                auto key = std::make_tuple(slot, c, claims, participants);
                if (node.agg_seen.insert(std::move(key)).second)
                    node.agg_pool.push_back(PoolEntry{payload_idx, now, next_seq_});
                broadcast(node_idx, payload_idx, now);
            }
        }

        // Vote pools for past slots are dead weight.
        while (!node.votes.empty() && node.votes.begin()->first.first + 2 <= slot)
            node.votes.erase(node.votes.begin());
    }

    SimConfig cfg_;
    ChainSpec spec_;
    GroundTruth gt_;

    std::vector<NodeState> nodes_;
    std::vector<size_t> hosting_;
    Seed32 duty_seed_{};

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_message_id_ = 0;

    std::vector<Payload> payloads_;
    std::vector<size_t> message_payload_;  // message index -> payload index

    std::map<Epoch, EpochDuties> duties_cache_;
    std::vector<Checkpoint> justified_by_epoch_;
    InclusionIndex canonical_index_;
    std::uint64_t canonical_count_ = 0;
    Root last_canonical_root_{};
    std::map<Epoch, std::pair<Slot, Root>> canonical_first_of_epoch_;
    std::unordered_map<size_t, FlagVector> slot_eval_cache_;
};

}  // namespace simdetail

inline SimRun run_simulation(const SimConfig& config) { return simdetail::Simulator(config).run(); }

// Flattened node-local reorg log, in node order then arrival order.
inline std::vector<ReorgEvent> emergent_reorgs(const SimRun& run) {
    std::vector<ReorgEvent> out;
    for (const NodeRunData& node : run.gt.nodes)
        out.insert(out.end(), node.reorgs.begin(), node.reorgs.end());
    return out;
}

}  // namespace clperf
