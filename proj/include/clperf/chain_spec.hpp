#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "clperf/errors.hpp"
#include "clperf/types.hpp"

namespace clperf {

// Protocol constants. Defaults match Ethereum mainnet's consensus layer.
struct ChainSpec {
    std::uint32_t seconds_per_slot = 12;
    std::uint32_t slots_per_epoch = 32;
    std::uint32_t attestation_deadline_s = 4;
    std::uint32_t aggregation_deadline_s = 8;
    std::uint32_t max_aggregations_per_block = 128;
    std::uint32_t max_committees_per_slot = 64;
    std::uint32_t aggregators_per_committee = 16;
    std::uint32_t sync_committee_size = 512;
    std::uint32_t sync_committee_period_epochs = 256;
    std::int64_t genesis_time = 0;  // wall-clock seconds

    WallMs slot_ms() const { return static_cast<WallMs>(seconds_per_slot) * 1000; }
    WallMs attestation_deadline_ms() const { return static_cast<WallMs>(attestation_deadline_s) * 1000; }
    WallMs aggregation_deadline_ms() const { return static_cast<WallMs>(aggregation_deadline_s) * 1000; }
    WallMs genesis_ms() const { return static_cast<WallMs>(genesis_time) * 1000; }

    void validate() const {
        if (attestation_deadline_s == 0 || attestation_deadline_s >= aggregation_deadline_s ||
            aggregation_deadline_s >= seconds_per_slot)
            throw ConfigError("chain spec requires 0 < attestation_deadline_s < aggregation_deadline_s < seconds_per_slot");
        if (slots_per_epoch == 0 || max_aggregations_per_block == 0 || max_committees_per_slot == 0 ||
            aggregators_per_committee == 0 || sync_committee_size == 0 || sync_committee_period_epochs == 0)
            throw ConfigError("chain spec counts must be strictly positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool split_key_value(const std::string& line, std::string& key, std::string& value) {
    const size_t eq = line.find('=');
    if (eq == std::string::npos) return false;
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    return !key.empty();
}

inline std::int64_t parse_int(const std::string& value, const std::string& what) {
    try {
        size_t used = 0;
        const std::int64_t out = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("expected integer for " + what + ", got '" + value + "'");
    }
}

inline double parse_double(const std::string& value, const std::string& what) {
    try {
        size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("expected number for " + what + ", got '" + value + "'");
    }
}

}  // namespace detail

// Applies one `key = value` setting. Returns false for unknown keys so callers
// layering their own settings on top can fall through.
inline bool apply_chain_spec_setting(ChainSpec& spec, const std::string& key, const std::string& value) {
    auto as_u32 = [&](std::uint32_t& field) {
        const std::int64_t v = detail::parse_int(value, key);
        if (v < 0) throw ConfigError(key + " must be non-negative");
        field = static_cast<std::uint32_t>(v);
    };
    if (key == "seconds_per_slot") as_u32(spec.seconds_per_slot);
    else if (key == "slots_per_epoch") as_u32(spec.slots_per_epoch);
    else if (key == "attestation_deadline_s") as_u32(spec.attestation_deadline_s);
    else if (key == "aggregation_deadline_s") as_u32(spec.aggregation_deadline_s);
    else if (key == "max_aggregations_per_block") as_u32(spec.max_aggregations_per_block);
    else if (key == "max_committees_per_slot") as_u32(spec.max_committees_per_slot);
    else if (key == "aggregators_per_committee") as_u32(spec.aggregators_per_committee);
    else if (key == "sync_committee_size") as_u32(spec.sync_committee_size);
    else if (key == "sync_committee_period_epochs") as_u32(spec.sync_committee_period_epochs);
    else if (key == "genesis_time") spec.genesis_time = detail::parse_int(value, key);
    else return false;
    return true;
}

// Plain-text config: one `key = value` per line, '#' starts a comment.
inline ChainSpec load_chain_spec(std::istream& in) {
    ChainSpec spec;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::string key, value;
        if (!detail::split_key_value(line, key, value))
            throw ConfigError("chain spec line " + std::to_string(line_no) + ": expected key = value");
        if (!apply_chain_spec_setting(spec, key, value))
            throw ConfigError("chain spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    spec.validate();
    return spec;
}

inline ChainSpec load_chain_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open chain spec file: " + path);
    return load_chain_spec(in);
}

// CLI-style overrides, each "key=value".
inline void apply_chain_spec_overrides(ChainSpec& spec, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        std::string key, value;
        if (!detail::split_key_value(item, key, value)) throw ConfigError("bad override (expected key=value): " + item);
        if (!apply_chain_spec_setting(spec, key, value)) throw ConfigError("unknown chain spec key: " + key);
    }
    spec.validate();
}

}  // namespace clperf
