#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clperf/errors.hpp"
#include "clperf/slot_math.hpp"
#include "clperf/stats.hpp"
#include "clperf/types.hpp"

namespace clperf {

enum class ArrivalKind { block, head, reorg };

inline const char* to_string(ArrivalKind kind) {
    switch (kind) {
        case ArrivalKind::block: return "block";
        case ArrivalKind::head: return "head";
        case ArrivalKind::reorg: return "reorg";
    }
    return "block";
}

inline ArrivalKind arrival_kind_from(const std::string& s) {
    if (s == "block") return ArrivalKind::block;
    if (s == "head") return ArrivalKind::head;
    if (s == "reorg") return ArrivalKind::reorg;
    throw DataError("unknown arrival kind: " + s);
}

// One timestamped notification from a monitored node, relative to the start
// of the slot it belongs to.
struct ArrivalRecord {
    SourceLabel source;
    Slot slot = 0;
    WallMs arrival_offset_ms = 0;
    ArrivalKind kind = ArrivalKind::block;
    bool skew_flagged = false;
};

// A maximal run of slots in one sync state for a node.
struct SyncSpan {
    SourceLabel source;
    Slot first_slot = 0;
    Slot last_slot = 0;
    bool out_of_sync = false;
};

struct ReorgEvent {
    SourceLabel source;
    Slot slot = 0;
    std::uint32_t depth = 0;  // blocks dropped; 0 when the node does not report it
};

// Stamps an event against the slot clock. A receiver clock slightly ahead
// produces a small negative raw offset: it is clamped to zero and flagged
// rather than poisoning the CDFs. An event whose slot has not plausibly
// started yet is rejected outright.
inline ArrivalRecord record_arrival(ArrivalKind kind, Slot slot, WallMs receipt_wall_ms, const SourceLabel& source,
                                    const SlotClock& clock) {
    const WallMs start = clock.start_ms(slot);
    const WallMs raw = receipt_wall_ms - start;
    if (raw < -clock.future_tolerance_ms())
        throw DataError("event for slot " + std::to_string(slot) + " arrived " + std::to_string(-raw) +
                        " ms before the slot starts: clock skew beyond tolerance");
    ArrivalRecord rec;
    rec.source = source;
    rec.slot = slot;
    rec.kind = kind;
    rec.arrival_offset_ms = std::max<WallMs>(raw, 0);
    rec.skew_flagged = raw < 0;
    return rec;
}

struct CdfPoint {
    int percentile;
    WallMs offset_ms;
};

struct LatencyCdf {
    std::vector<CdfPoint> points;
    double mean_ms = 0;
    size_t samples = 0;
};

inline constexpr int kCdfPercentiles[] = {10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99};

// Empirical CDF by nearest rank: percentile p maps to the ceil(p*n/100)-th
// smallest offset, no interpolation. Returns nothing for an empty group.
inline std::optional<LatencyCdf> latency_cdf(std::vector<WallMs> offsets) {
    if (offsets.empty()) return std::nullopt;
    std::sort(offsets.begin(), offsets.end());
    LatencyCdf cdf;
    cdf.samples = offsets.size();
    const std::uint64_t n = offsets.size();
    for (int p : kCdfPercentiles) {
        std::uint64_t rank = (static_cast<std::uint64_t>(p) * n + 99) / 100;  // ceil(p*n/100)
        if (rank == 0) rank = 1;
        cdf.points.push_back(CdfPoint{p, offsets[rank - 1]});
    }
    double sum = 0;
    for (WallMs v : offsets) sum += static_cast<double>(v);
    cdf.mean_ms = sum / static_cast<double>(n);
    return cdf;
}

// Share of the measured window a node spent out of sync.
inline double out_of_sync_ratio(std::span<const SyncSpan> spans, std::uint64_t measured_slots) {
    if (measured_slots == 0) throw DataError("out_of_sync_ratio over zero measured slots");
    std::uint64_t out = 0;
    for (const auto& span : spans)
        if (span.out_of_sync) out += span.last_slot - span.first_slot + 1;
    return static_cast<double>(out) / static_cast<double>(measured_slots);
}

struct ReorgStat {
    std::string group;
    std::uint64_t events = 0;
    std::uint64_t known_depth_events = 0;
    double mean_known_depth = 0;  // over events with a reported depth only
};

inline std::vector<ReorgStat> reorg_stats(std::span<const ReorgEvent> events, GroupBy by) {
    struct Acc {
        std::uint64_t events = 0;
        std::uint64_t known = 0;
        std::uint64_t depth_sum = 0;
    };
    std::map<std::string, Acc> groups;
    for (const auto& ev : events) {
        Acc& acc = groups[group_key(ev.source, by)];
        acc.events += 1;
        if (ev.depth > 0) {
            acc.known += 1;
            acc.depth_sum += ev.depth;
        }
    }
    std::vector<ReorgStat> rows;
    rows.reserve(groups.size());
    for (const auto& [group, acc] : groups) {
        ReorgStat row;
        row.group = group;
        row.events = acc.events;
        row.known_depth_events = acc.known;
        row.mean_known_depth = acc.known > 0 ? static_cast<double>(acc.depth_sum) / static_cast<double>(acc.known) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace clperf
