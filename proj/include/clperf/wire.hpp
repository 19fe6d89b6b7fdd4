#pragma once

// JSON payload schemas shared by the API client and the simulator's server.
// Field names and numbers-as-strings mirror the standard beacon API eventing
// closely enough to point the client at real nodes; unknown fields are
// ignored for forward compatibility.

#include <string>

#include <json.hpp>

#include "clperf/block_score.hpp"
#include "clperf/errors.hpp"
#include "clperf/types.hpp"

namespace clperf {

enum class StreamKind { head, block, chain_reorg };

inline const char* stream_topic(StreamKind kind) {
    switch (kind) {
        case StreamKind::head: return "head";
        case StreamKind::block: return "block";
        case StreamKind::chain_reorg: return "chain_reorg";
    }
    return "block";
}

inline StreamKind stream_kind_from_topic(const std::string& topic) {
    if (topic == "head") return StreamKind::head;
    if (topic == "block") return StreamKind::block;
    if (topic == "chain_reorg") return StreamKind::chain_reorg;
    throw DataError("unknown event topic: " + topic);
}

namespace wire {

using json = nlohmann::json;

// Beacon APIs encode uint64 values as decimal strings; accept both.
inline std::uint64_t as_u64(const json& value, const std::string& what) {
    if (value.is_number_unsigned() || value.is_number_integer()) return value.get<std::uint64_t>();
    if (value.is_string()) {
        try {
            return std::stoull(value.get<std::string>());
        } catch (const std::exception&) {
        }
    }
    throw DataError("expected integer for " + what);
}

inline std::uint64_t field_u64(const json& j, const std::string& key) {
    if (!j.contains(key)) throw DataError("missing field: " + key);
    return as_u64(j.at(key), key);
}

inline Root field_root(const json& j, std::initializer_list<const char*> keys) {
    for (const char* key : keys)
        if (j.contains(key) && j.at(key).is_string()) return Root::from_hex(j.at(key).get<std::string>());
    throw DataError("missing root field");
}

// --- event payloads -------------------------------------------------------
// block / head: {"slot": "N", "block": "0x..."}
// chain_reorg: {"slot": "N", "depth": "D", "old_head_block": "0x...",
//               "new_head_block": "0x..."}

inline std::string block_event_payload(Slot slot, const Root& root) {
    json j;
    j["slot"] = std::to_string(slot);
    j["block"] = root.to_hex();
    return j.dump();
}

inline std::string head_event_payload(Slot slot, const Root& root) { return block_event_payload(slot, root); }

inline std::string reorg_event_payload(Slot slot, std::uint32_t depth, const Root& old_head, const Root& new_head) {
    json j;
    j["slot"] = std::to_string(slot);
    j["depth"] = std::to_string(depth);
    j["old_head_block"] = old_head.to_hex();
    j["new_head_block"] = new_head.to_hex();
    return j.dump();
}

// --- sync status ------------------------------------------------------------
// {"data": {"is_syncing": false, "head_slot": "99"}}

inline std::string syncing_payload(bool is_syncing, Slot head_slot) {
    json j;
    j["data"]["is_syncing"] = is_syncing;
    j["data"]["head_slot"] = std::to_string(head_slot);
    return j.dump();
}

// --- block summaries ----------------------------------------------------------
// {"version": "clperf-summary", "data": {"slot": "N", "proposer_index": "V",
//  "parent_root": "0x..", "root": "0x..", "sync_participation": "N",
//  "attester_slashings": "N", "proposer_slashings": "N",
//  "aggregates": [{"attested_slot": "N", "committee_index": "C",
//                  "participants": [ids...],
//                  "source_ok": true, "target_ok": true, "head_ok": false}]}}

inline json block_summary_to_json(const BlockSummary& block) {
    json data;
    data["slot"] = std::to_string(block.slot);
    data["proposer_index"] = std::to_string(block.proposer);
    data["parent_root"] = block.parent_root.to_hex();
    data["root"] = block.root.to_hex();
    data["sync_participation"] = std::to_string(block.sync_participation);
    data["attester_slashings"] = std::to_string(block.attester_slashings);
    data["proposer_slashings"] = std::to_string(block.proposer_slashings);
    data["aggregates"] = json::array();
    for (const auto& agg : block.aggregates) {
        json a;
        a["attested_slot"] = std::to_string(agg.attested_slot);
        a["committee_index"] = std::to_string(agg.committee_index);
        a["participants"] = agg.participants;
        a["source_ok"] = agg.claims.source_ok;
        a["target_ok"] = agg.claims.target_ok;
        a["head_ok"] = agg.claims.head_ok;
        data["aggregates"].push_back(std::move(a));
    }
    json j;
    j["version"] = "clperf-summary";
    j["data"] = std::move(data);
    return j;
}

inline BlockSummary block_summary_from_json(const json& j) {
    const json& data = j.contains("data") ? j.at("data") : j;
    BlockSummary block;
    block.slot = field_u64(data, "slot");
    block.proposer = static_cast<ValidatorId>(field_u64(data, "proposer_index"));
    block.parent_root = field_root(data, {"parent_root"});
    block.root = field_root(data, {"root"});
    block.sync_participation = static_cast<std::uint32_t>(field_u64(data, "sync_participation"));
    block.attester_slashings = static_cast<std::uint32_t>(field_u64(data, "attester_slashings"));
    block.proposer_slashings = static_cast<std::uint32_t>(field_u64(data, "proposer_slashings"));
    if (data.contains("aggregates")) {
        for (const json& a : data.at("aggregates")) {
            AggregateAttestation agg;
            agg.attested_slot = field_u64(a, "attested_slot");
            agg.committee_index = static_cast<std::uint32_t>(field_u64(a, "committee_index"));
            for (const json& p : a.at("participants")) agg.participants.push_back(static_cast<ValidatorId>(as_u64(p, "participant")));
            agg.claims.source_ok = a.at("source_ok").get<bool>();
            agg.claims.target_ok = a.at("target_ok").get<bool>();
            agg.claims.head_ok = a.at("head_ok").get<bool>();
            block.aggregates.push_back(std::move(agg));
        }
    }
    return block;
}

}  // namespace wire
}  // namespace clperf
