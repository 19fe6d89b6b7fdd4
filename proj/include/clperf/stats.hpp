#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clperf/rewards.hpp"

namespace clperf {

enum class GroupBy { location, client };

inline const std::string& group_key(const SourceLabel& label, GroupBy by) {
    return by == GroupBy::location ? label.location : label.client;
}

// One aggregated row per group: achieved reward as a share of the maximum,
// how often each flag was missed, and how many assigned proposals were missed.
struct StatRow {
    std::string group;
    size_t validators = 0;
    size_t records = 0;
    double achieved_pct = 0;        // 100 * sum(achieved) / sum(mer)
    double missed_source_ratio = 0;
    double missed_target_ratio = 0;
    double missed_head_ratio = 0;
    double missed_proposal_ratio = 0;
    std::uint64_t proposals_assigned = 0;
    std::uint64_t proposals_fulfilled = 0;
};

// Groups epoch performances by location or client. Empty input yields an
// explicit empty report (no rows), never rows of NaN.
inline std::vector<StatRow> aggregate_stats(std::span<const EpochPerformance> records, GroupBy by) {
    struct Acc {
        std::set<ValidatorId> validators;
        size_t records = 0;
        double achieved = 0;
        double mer = 0;
        size_t missed_source = 0, missed_target = 0, missed_head = 0;
        std::uint64_t proposals_assigned = 0, proposals_fulfilled = 0;
    };
    std::map<std::string, Acc> groups;
    for (const auto& rec : records) {
        Acc& acc = groups[group_key(rec.label, by)];
        acc.validators.insert(rec.validator);
        acc.records += 1;
        acc.achieved += rec.achieved;
        acc.mer += rec.mer;
        acc.missed_source += rec.flags.source_ok ? 0 : 1;
        acc.missed_target += rec.flags.target_ok ? 0 : 1;
        acc.missed_head += rec.flags.head_ok ? 0 : 1;
        acc.proposals_assigned += rec.proposals_assigned;
        acc.proposals_fulfilled += rec.proposals_fulfilled;
    }

    std::vector<StatRow> rows;
    rows.reserve(groups.size());
    for (const auto& [group, acc] : groups) {
        StatRow row;
        row.group = group;
        row.validators = acc.validators.size();
        row.records = acc.records;
        row.achieved_pct = acc.mer > 0 ? 100.0 * acc.achieved / acc.mer : 0.0;
        const double n = static_cast<double>(acc.records);
        row.missed_source_ratio = static_cast<double>(acc.missed_source) / n;
        row.missed_target_ratio = static_cast<double>(acc.missed_target) / n;
        row.missed_head_ratio = static_cast<double>(acc.missed_head) / n;
        row.proposals_assigned = acc.proposals_assigned;
        row.proposals_fulfilled = acc.proposals_fulfilled;
        row.missed_proposal_ratio =
            acc.proposals_assigned > 0
                ? static_cast<double>(acc.proposals_assigned - acc.proposals_fulfilled) /
                      static_cast<double>(acc.proposals_assigned)
                : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;  // std::map iteration keeps groups lexicographic
}

}  // namespace clperf
