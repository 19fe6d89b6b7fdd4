#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clperf/chain_spec.hpp"
#include "clperf/errors.hpp"
#include "clperf/rewards.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Directed latency between two regions: lognormal parameterized by median
// (milliseconds) and sigma. The heavy right tail is the point: a slice of
// arrivals landing past the attestation deadline is what degrades duties.
struct LatencyModel {
    double median_ms = 0;
    double sigma = 0;
};

struct RegionProfile {
    std::string name;
    int peer_count = 50;
};

struct NodeSpec {
    std::string id;
    std::string region;
    std::string client;
    double processing_ms = 0;  // per-message constant
    double jitter_ms = 0;      // per-message non-negative normal sd
    int peer_count = 0;        // 0 = inherit from region
    bool host_validators = true;
};

enum class FaultKind { node_down, clock_skew, stream_drop };

inline const char* to_string(FaultKind kind) {
    switch (kind) {
        case FaultKind::node_down: return "node_down";
        case FaultKind::clock_skew: return "clock_skew";
        case FaultKind::stream_drop: return "stream_drop";
    }
    return "node_down";
}

struct FaultSpec {
    FaultKind kind = FaultKind::node_down;
    std::string node;
    Slot from_slot = 0;
    Slot to_slot = 0;  // inclusive
    WallMs skew_ms = 0;
};

struct SimConfig {
    ChainSpec spec;
    RewardWeights weights;
    double base_reward = kDefaultBaseReward;
    std::vector<RegionProfile> regions;
    std::map<std::pair<std::string, std::string>, LatencyModel> latency;
    LatencyModel default_latency;
    std::vector<NodeSpec> nodes;
    std::uint32_t validators = 0;
    Slot duration_slots = 0;
    std::uint64_t seed = 1;
    bool candidates = true;
    std::vector<FaultSpec> faults;

    const LatencyModel& edge(const std::string& from, const std::string& to) const {
        const auto it = latency.find({from, to});
        return it != latency.end() ? it->second : default_latency;
    }

    const RegionProfile* region(const std::string& name) const {
        for (const auto& r : regions)
            if (r.name == name) return &r;
        return nullptr;
    }

    int node_peer_count(const NodeSpec& node) const {
        if (node.peer_count > 0) return node.peer_count;
        const RegionProfile* r = region(node.region);
        return r ? r->peer_count : 50;
    }

    std::vector<size_t> hosting_nodes() const {
        std::vector<size_t> out;
        for (size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].host_validators) out.push_back(i);
        return out;
    }

    void validate() const {
        spec.validate();
        weights.validate();
        if (base_reward <= 0) throw ConfigError("base_reward must be positive");
        if (validators < 1) throw ConfigError("scenario needs at least one validator");
        if (duration_slots < spec.slots_per_epoch) throw ConfigError("duration must cover at least one epoch");
        if (nodes.empty()) throw ConfigError("scenario needs at least one node");
        std::set<std::string> ids;
        for (const auto& node : nodes) {
            if (!ids.insert(node.id).second) throw ConfigError("duplicate node id: " + node.id);
            if (!region(node.region)) throw ConfigError("node " + node.id + " references unknown region " + node.region);
            if (node.processing_ms < 0 || node.jitter_ms < 0)
                throw ConfigError("node " + node.id + " has negative processing parameters");
        }
        for (const auto& r : regions)
            if (r.peer_count < 1) throw ConfigError("region " + r.name + " needs peer_count >= 1");
        if (hosting_nodes().empty()) throw ConfigError("at least one node must host validators");
        for (const auto& [pair, model] : latency)
            if (!region(pair.first) || !region(pair.second))
                throw ConfigError("latency entry references unknown region " + pair.first + " -> " + pair.second);
        for (const auto& fault : faults) validate_fault(fault, /*check_overlap=*/false);
        for (size_t i = 0; i < faults.size(); ++i)
            for (size_t j = i + 1; j < faults.size(); ++j)
                if (overlapping(faults[i], faults[j]))
                    throw ConfigError("overlapping duplicate fault on node " + faults[i].node);
    }

    void validate_fault(const FaultSpec& fault, bool check_overlap = true) const {
        bool node_known = false;
        for (const auto& node : nodes) node_known |= node.id == fault.node;
        if (!node_known) throw ConfigError("fault references unknown node " + fault.node);
        if (fault.from_slot > fault.to_slot) throw ConfigError("fault window is inverted");
        if (fault.to_slot >= duration_slots) throw ConfigError("fault window extends past the run duration");
        if (fault.kind == FaultKind::clock_skew && std::llabs(fault.skew_ms) >= spec.slot_ms())
            throw ConfigError("clock skew must stay below a slot length");
        if (check_overlap)
            for (const auto& existing : faults)
                if (overlapping(existing, fault)) throw ConfigError("overlapping duplicate fault on node " + fault.node);
    }

private:
    static bool overlapping(const FaultSpec& a, const FaultSpec& b) {
        return a.kind == b.kind && a.node == b.node && a.from_slot <= b.to_slot && b.from_slot <= a.to_slot;
    }
};

// Returns a copy of the config with the fault added, rejecting overlapping
// duplicates on the same node.
inline SimConfig inject_fault(SimConfig config, const FaultSpec& fault) {
    config.validate_fault(fault);
    config.faults.push_back(fault);
    return config;
}

// Scenario files are plain text: `[section]` headers, `key = value` lines,
// `#` comments. Sections: [spec], [sim], [rewards], [region NAME],
// [latency default], [latency FROM -> TO], [node ID], [fault KIND].
inline SimConfig parse_scenario(std::istream& in) {
    SimConfig config;
    std::string section, arg;
    RegionProfile* current_region = nullptr;
    NodeSpec* current_node = nullptr;
    LatencyModel* current_latency = nullptr;
    FaultSpec* current_fault = nullptr;

    std::string line;
    size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> void { throw ConfigError("scenario line " + std::to_string(line_no) + ": " + msg); };

    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            const std::string header = detail::trim(line.substr(1, line.size() - 2));
            const size_t space = header.find(' ');
            section = space == std::string::npos ? header : header.substr(0, space);
            arg = space == std::string::npos ? "" : detail::trim(header.substr(space + 1));
            current_region = nullptr;
            current_node = nullptr;
            current_latency = nullptr;
            current_fault = nullptr;
            if (section == "region") {
                if (arg.empty()) fail("region section needs a name");
                config.regions.push_back(RegionProfile{arg, 50});
                current_region = &config.regions.back();
            } else if (section == "latency") {
                if (arg == "default" || arg.empty()) {
                    current_latency = &config.default_latency;
                } else {
                    const size_t arrow = arg.find("->");
                    if (arrow == std::string::npos) fail("latency section needs 'FROM -> TO' or 'default'");
                    const std::string from = detail::trim(arg.substr(0, arrow));
                    const std::string to = detail::trim(arg.substr(arrow + 2));
                    if (from.empty() || to.empty()) fail("latency section needs both endpoints");
                    current_latency = &config.latency[{from, to}];
                }
            } else if (section == "node") {
                if (arg.empty()) fail("node section needs an id");
                NodeSpec node;
                node.id = arg;
                config.nodes.push_back(node);
                current_node = &config.nodes.back();
            } else if (section == "fault") {
                FaultSpec fault;
                if (arg == "node_down") fault.kind = FaultKind::node_down;
                else if (arg == "clock_skew") fault.kind = FaultKind::clock_skew;
                else if (arg == "stream_drop") fault.kind = FaultKind::stream_drop;
                else fail("unknown fault kind '" + arg + "'");
                config.faults.push_back(fault);
                current_fault = &config.faults.back();
            } else if (section != "spec" && section != "sim" && section != "rewards") {
                fail("unknown section [" + section + "]");
            }
            continue;
        }

        std::string key, value;
        if (!detail::split_key_value(line, key, value)) fail("expected key = value");

        if (section == "spec") {
            if (!apply_chain_spec_setting(config.spec, key, value)) fail("unknown spec key '" + key + "'");
        } else if (section == "sim") {
            if (key == "validators") config.validators = static_cast<std::uint32_t>(detail::parse_int(value, key));
            else if (key == "duration_slots") config.duration_slots = static_cast<Slot>(detail::parse_int(value, key));
            else if (key == "seed") config.seed = static_cast<std::uint64_t>(detail::parse_int(value, key));
            else if (key == "candidates") config.candidates = value == "on" || value == "true" || value == "yes";
            else fail("unknown sim key '" + key + "'");
        } else if (section == "rewards") {
            auto as_u32 = [&](std::uint32_t& field) { field = static_cast<std::uint32_t>(detail::parse_int(value, key)); };
            if (key == "base_reward") config.base_reward = detail::parse_double(value, key);
            else if (key == "w_source") as_u32(config.weights.w_source);
            else if (key == "w_target") as_u32(config.weights.w_target);
            else if (key == "w_head") as_u32(config.weights.w_head);
            else if (key == "w_sync") as_u32(config.weights.w_sync);
            else if (key == "w_proposer") as_u32(config.weights.w_proposer);
            else if (key == "denominator") as_u32(config.weights.denominator);
            else fail("unknown rewards key '" + key + "'");
        } else if (section == "region") {
            if (key == "peer_count") current_region->peer_count = static_cast<int>(detail::parse_int(value, key));
            else fail("unknown region key '" + key + "'");
        } else if (section == "latency") {
            if (!current_latency) fail("latency values outside a latency section");
            if (key == "median_ms") current_latency->median_ms = detail::parse_double(value, key);
            else if (key == "sigma") current_latency->sigma = detail::parse_double(value, key);
            else fail("unknown latency key '" + key + "'");
        } else if (section == "node") {
            if (key == "region") current_node->region = value;
            else if (key == "client") current_node->client = value;
            else if (key == "processing_ms") current_node->processing_ms = detail::parse_double(value, key);
            else if (key == "jitter_ms") current_node->jitter_ms = detail::parse_double(value, key);
            else if (key == "peers") current_node->peer_count = static_cast<int>(detail::parse_int(value, key));
            else if (key == "host_validators") current_node->host_validators = value == "yes" || value == "true" || value == "on";
            else fail("unknown node key '" + key + "'");
        } else if (section == "fault") {
            if (key == "node") current_fault->node = value;
            else if (key == "from_slot") current_fault->from_slot = static_cast<Slot>(detail::parse_int(value, key));
            else if (key == "to_slot") current_fault->to_slot = static_cast<Slot>(detail::parse_int(value, key));
            else if (key == "skew_ms") current_fault->skew_ms = detail::parse_int(value, key);
            else fail("unknown fault key '" + key + "'");
        } else {
            fail("values before any section header");
        }
    }

    config.validate();
    return config;
}

inline SimConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    return parse_scenario(in);
}

}  // namespace clperf
