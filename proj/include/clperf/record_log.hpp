#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clperf/block_score.hpp"
#include "clperf/errors.hpp"
#include "clperf/rewards.hpp"
#include "clperf/telemetry.hpp"
#include "clperf/types.hpp"

namespace clperf {

using json = nlohmann::json;

inline constexpr int kLogSchemaVersion = 1;

// A candidate or canonical block's score as persisted.
struct BlockScoreRecord {
    SourceLabel source;
    Slot slot = 0;
    bool canonical = false;
    std::uint32_t rank = 0;  // 1-based among the slot's candidates; 0 for canonical rows
    BlockScore score;
};

// Ground-truth rows written by the simulator: the canonical chain plus the
// counters the conservation checks verify against.
struct GtChainSlot {
    Slot slot = 0;
    std::optional<Root> root;
};

struct GtCounts {
    std::uint64_t events_generated = 0;
    std::uint64_t events_dropped = 0;
    std::uint64_t proposals_assigned = 0;
    std::uint64_t proposals_fulfilled = 0;
};

namespace logdetail {

inline std::uint64_t fnv1a64(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace logdetail

// JSON bindings for the record payloads.

inline json to_json(const SourceLabel& label) {
    return json{{"node", label.node}, {"location", label.location}, {"client", label.client}};
}

inline SourceLabel label_from_json(const json& j) {
    return SourceLabel{j.at("node").get<std::string>(), j.at("location").get<std::string>(),
                       j.at("client").get<std::string>()};
}

inline json arrival_payload(const ArrivalRecord& rec) {
    json j = to_json(rec.source);
    j["slot"] = rec.slot;
    j["offset_ms"] = rec.arrival_offset_ms;
    j["event"] = to_string(rec.kind);
    j["skew"] = rec.skew_flagged;
    return j;
}

inline ArrivalRecord arrival_from_json(const json& j) {
    ArrivalRecord rec;
    rec.source = label_from_json(j);
    rec.slot = j.at("slot").get<Slot>();
    rec.arrival_offset_ms = j.at("offset_ms").get<WallMs>();
    rec.kind = arrival_kind_from(j.at("event").get<std::string>());
    rec.skew_flagged = j.at("skew").get<bool>();
    return rec;
}

inline json block_score_payload(const BlockScoreRecord& rec) {
    json j = to_json(rec.source);
    j["slot"] = rec.slot;
    j["canonical"] = rec.canonical;
    j["rank"] = rec.rank;
    j["score"] = rec.score.score;
    j["new_votes"] = rec.score.new_votes;
    j["new_source"] = rec.score.new_source;
    j["new_target"] = rec.score.new_target;
    j["new_head"] = rec.score.new_head;
    j["sync_bits"] = rec.score.sync_bits;
    j["att_slashings"] = rec.score.attester_slashings;
    j["prop_slashings"] = rec.score.proposer_slashings;
    return j;
}

inline BlockScoreRecord block_score_from_json(const json& j) {
    BlockScoreRecord rec;
    rec.source = label_from_json(j);
    rec.slot = j.at("slot").get<Slot>();
    rec.canonical = j.at("canonical").get<bool>();
    rec.rank = j.at("rank").get<std::uint32_t>();
    rec.score.score = j.at("score").get<double>();
    rec.score.new_votes = j.at("new_votes").get<std::uint32_t>();
    rec.score.new_source = j.at("new_source").get<std::uint32_t>();
    rec.score.new_target = j.at("new_target").get<std::uint32_t>();
    rec.score.new_head = j.at("new_head").get<std::uint32_t>();
    rec.score.sync_bits = j.at("sync_bits").get<std::uint32_t>();
    rec.score.attester_slashings = j.at("att_slashings").get<std::uint32_t>();
    rec.score.proposer_slashings = j.at("prop_slashings").get<std::uint32_t>();
    return rec;
}

inline json performance_payload(const EpochPerformance& perf) {
    json j = to_json(perf.label);
    j["validator"] = perf.validator;
    j["epoch"] = perf.epoch;
    j["achieved"] = perf.achieved;
    j["mer"] = perf.mer;
    j["source_ok"] = perf.flags.source_ok;
    j["target_ok"] = perf.flags.target_ok;
    j["head_ok"] = perf.flags.head_ok;
    if (perf.flags.inclusion_delay) j["delay"] = *perf.flags.inclusion_delay;
    else j["delay"] = nullptr;
    j["props_assigned"] = perf.proposals_assigned;
    j["props_done"] = perf.proposals_fulfilled;
    j["sync_assigned"] = perf.sync_slots_assigned;
    j["sync_signed"] = perf.sync_slots_signed;
    return j;
}

inline EpochPerformance performance_from_json(const json& j) {
    EpochPerformance perf;
    perf.label = label_from_json(j);
    perf.validator = j.at("validator").get<ValidatorId>();
    perf.epoch = j.at("epoch").get<Epoch>();
    perf.achieved = j.at("achieved").get<double>();
    perf.mer = j.at("mer").get<double>();
    perf.flags.source_ok = j.at("source_ok").get<bool>();
    perf.flags.target_ok = j.at("target_ok").get<bool>();
    perf.flags.head_ok = j.at("head_ok").get<bool>();
    if (!j.at("delay").is_null()) perf.flags.inclusion_delay = j.at("delay").get<std::uint32_t>();
    perf.proposals_assigned = j.at("props_assigned").get<std::uint32_t>();
    perf.proposals_fulfilled = j.at("props_done").get<std::uint32_t>();
    perf.sync_slots_assigned = j.at("sync_assigned").get<std::uint32_t>();
    perf.sync_slots_signed = j.at("sync_signed").get<std::uint32_t>();
    return perf;
}

inline json reorg_payload(const ReorgEvent& ev) {
    json j = to_json(ev.source);
    j["slot"] = ev.slot;
    j["depth"] = ev.depth;
    return j;
}

inline ReorgEvent reorg_from_json(const json& j) {
    return ReorgEvent{label_from_json(j), j.at("slot").get<Slot>(), j.at("depth").get<std::uint32_t>()};
}

inline json sync_span_payload(const SyncSpan& span) {
    json j = to_json(span.source);
    j["first_slot"] = span.first_slot;
    j["last_slot"] = span.last_slot;
    j["out_of_sync"] = span.out_of_sync;
    return j;
}

inline SyncSpan sync_span_from_json(const json& j) {
    return SyncSpan{label_from_json(j), j.at("first_slot").get<Slot>(), j.at("last_slot").get<Slot>(),
                    j.at("out_of_sync").get<bool>()};
}

// Append-only line-delimited record log. Every line carries a monotonically
// increasing ingestion id, the schema version, and a chained checksum so
// tampering anywhere in the file is detectable.
class RecordLog {
public:
    explicit RecordLog(std::string path) : path_(std::move(path)) {
        if (std::filesystem::exists(path_)) restore_state();
        out_.open(path_, std::ios::app);
        if (!out_) throw ConfigError("cannot open record log for writing: " + path_);
    }

    const std::string& path() const { return path_; }
    std::uint64_t next_id() const { return next_id_; }
    const std::set<std::uint64_t>& ids() const { return ids_; }

    // Appends one record; `explicit_id` preserves ids when replaying another
    // log. Returns false when that id is already present (idempotent replay).
    bool append(const std::string& kind, json payload, std::uint64_t explicit_id = 0) {
        const std::uint64_t id = explicit_id != 0 ? explicit_id : next_id_;
        if (ids_.count(id)) return false;
        payload["id"] = id;
        payload["v"] = kLogSchemaVersion;
        payload["kind"] = kind;
        const std::string body = payload.dump();
        last_hash_ = logdetail::fnv1a64(body, logdetail::fnv1a64(logdetail::hash_hex(last_hash_)));
        payload["h"] = logdetail::hash_hex(last_hash_);
        out_ << payload.dump() << '\n';
        out_.flush();
        ids_.insert(id);
        next_id_ = std::max(next_id_, id + 1);
        return true;
    }

    // Reads and fully verifies a log: schema versions, strictly increasing
    // ids, and the checksum chain.
    static std::vector<json> read_verified(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open record log: " + path);
        std::vector<json> records;
        std::string line;
        std::uint64_t last_hash = 0;
        std::uint64_t prev_id = 0;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw DataError("record log line " + std::to_string(line_no) + ": bad JSON: " + e.what());
            }
            if (!j.contains("v") || j.at("v").get<int>() != kLogSchemaVersion)
                throw DataError("record log line " + std::to_string(line_no) + ": schema version " +
                                (j.contains("v") ? j.at("v").dump() : "missing") + ", this build reads version " +
                                std::to_string(kLogSchemaVersion));
            if (!j.contains("id") || !j.contains("kind") || !j.contains("h"))
                throw DataError("record log line " + std::to_string(line_no) + ": missing id/kind/h");
            const std::uint64_t id = j.at("id").get<std::uint64_t>();
            if (id <= prev_id)
                throw DataError("record log line " + std::to_string(line_no) + ": ingestion id not increasing");
            prev_id = id;
            const std::string stored_hash = j.at("h").get<std::string>();
            json body = j;
            body.erase("h");
            last_hash = logdetail::fnv1a64(body.dump(), logdetail::fnv1a64(logdetail::hash_hex(last_hash)));
            if (logdetail::hash_hex(last_hash) != stored_hash)
                throw DataError("record log line " + std::to_string(line_no) + ": checksum mismatch (tampered?)");
            records.push_back(std::move(j));
        }
        return records;
    }

    // Replays another log into this one, preserving ids and skipping records
    // already present. Returns the number of records appended.
    size_t replay_from(const std::string& source_path) {
        size_t appended = 0;
        for (json record : RecordLog::read_verified(source_path)) {
            const std::uint64_t id = record.at("id").get<std::uint64_t>();
            const std::string kind = record.at("kind").get<std::string>();
            record.erase("h");
            record.erase("id");
            record.erase("v");
            record.erase("kind");
            if (append(kind, std::move(record), id)) ++appended;
        }
        return appended;
    }

private:
    void restore_state() {
        for (const json& record : read_verified(path_)) {
            const std::uint64_t id = record.at("id").get<std::uint64_t>();
            ids_.insert(id);
            next_id_ = std::max(next_id_, id + 1);
            json body = record;
            body.erase("h");
            last_hash_ = logdetail::fnv1a64(body.dump(), logdetail::fnv1a64(logdetail::hash_hex(last_hash_)));
        }
    }

    std::string path_;
    std::ofstream out_;
    std::uint64_t next_id_ = 1;
    std::uint64_t last_hash_ = 0;
    std::set<std::uint64_t> ids_;
};

// Typed view of a verified log.
struct LoadedLog {
    std::vector<ArrivalRecord> arrivals;
    std::vector<BlockScoreRecord> block_scores;
    std::vector<EpochPerformance> performances;
    std::vector<ReorgEvent> reorgs;
    std::vector<SyncSpan> sync_spans;
    std::vector<GtChainSlot> chain;
    std::optional<GtCounts> counts;
    size_t total_records = 0;
    std::map<std::string, size_t> count_by_kind;
};

inline LoadedLog load_log(const std::string& path) {
    LoadedLog log;
    for (const json& j : RecordLog::read_verified(path)) {
        const std::string kind = j.at("kind").get<std::string>();
        log.count_by_kind[kind] += 1;
        log.total_records += 1;
        if (kind == "arrival") log.arrivals.push_back(arrival_from_json(j));
        else if (kind == "block_score") log.block_scores.push_back(block_score_from_json(j));
        else if (kind == "epoch_performance") log.performances.push_back(performance_from_json(j));
        else if (kind == "reorg") log.reorgs.push_back(reorg_from_json(j));
        else if (kind == "sync_span") log.sync_spans.push_back(sync_span_from_json(j));
        else if (kind == "ground_truth") {
            const std::string gt = j.at("gt").get<std::string>();
            if (gt == "chain_slot") {
                GtChainSlot slot;
                slot.slot = j.at("slot").get<Slot>();
                if (!j.at("root").is_null()) slot.root = Root::from_hex(j.at("root").get<std::string>());
                log.chain.push_back(slot);
            } else if (gt == "counts") {
                GtCounts counts;
                counts.events_generated = j.at("events_generated").get<std::uint64_t>();
                counts.events_dropped = j.at("events_dropped").get<std::uint64_t>();
                counts.proposals_assigned = j.at("proposals_assigned").get<std::uint64_t>();
                counts.proposals_fulfilled = j.at("proposals_fulfilled").get<std::uint64_t>();
                log.counts = counts;
            } else {
                throw DataError("unknown ground_truth record: " + gt);
            }
        } else {
            throw DataError("unknown record kind: " + kind);
        }
    }
    return log;
}

}  // namespace clperf
