#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clperf/errors.hpp"
#include "clperf/record_log.hpp"
#include "clperf/stats.hpp"
#include "clperf/telemetry.hpp"

namespace clperf {

enum class ReportKind {
    rewards_by_location,
    missed_flags,
    missed_blocks,
    reorgs,
    block_scores,
    arrival_cdf,
    out_of_sync,
    client_location_heatmap,
};

inline ReportKind parse_report_kind(const std::string& name) {
    if (name == "rewards_by_location") return ReportKind::rewards_by_location;
    if (name == "missed_flags") return ReportKind::missed_flags;
    if (name == "missed_blocks") return ReportKind::missed_blocks;
    if (name == "reorgs") return ReportKind::reorgs;
    if (name == "block_scores") return ReportKind::block_scores;
    if (name == "arrival_cdf") return ReportKind::arrival_cdf;
    if (name == "out_of_sync") return ReportKind::out_of_sync;
    if (name == "client_location_heatmap") return ReportKind::client_location_heatmap;
    throw ConfigError("unknown report kind: " + name +
                      " (expected rewards_by_location|missed_flags|missed_blocks|reorgs|block_scores|arrival_cdf|"
                      "out_of_sync|client_location_heatmap)");
}

struct ReportSpec {
    ReportKind kind = ReportKind::rewards_by_location;
    GroupBy grouping = GroupBy::location;
    std::optional<Slot> from_slot;
    std::optional<Slot> to_slot;            // inclusive
    std::uint32_t slots_per_epoch = 32;     // maps epoch records onto the slot window
};

struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

namespace reportdetail {

inline std::string fmt(const char* format, double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), format, value);
    return buffer;
}

inline std::string pct(double ratio_times_100) { return fmt("%.1f", ratio_times_100); }

template <typename T>
inline bool in_window(const ReportSpec& spec, T slot) {
    if (spec.from_slot && slot < *spec.from_slot) return false;
    if (spec.to_slot && slot > *spec.to_slot) return false;
    return true;
}

inline void require(bool ok, const std::string& missing_kind) {
    if (!ok) throw DataError("insufficient data: report needs " + missing_kind + " records");
}

}  // namespace reportdetail

inline Table build_report(const ReportSpec& spec, const LoadedLog& log) {
    using reportdetail::fmt;
    using reportdetail::in_window;
    using reportdetail::pct;
    using reportdetail::require;

    Table table;
    switch (spec.kind) {
        case ReportKind::rewards_by_location: {
            require(!log.performances.empty(), "epoch_performance");
            std::vector<EpochPerformance> recs;
            for (const auto& p : log.performances)
                if (in_window(spec, p.epoch * spec.slots_per_epoch)) recs.push_back(p);
            require(!recs.empty(), "epoch_performance (in window)");
            table.title = "Achieved reward as % of the maximum extractable reward";
            table.columns = {"group", "validators", "epochs", "achieved_pct"};
            for (const auto& row : aggregate_stats(recs, spec.grouping))
                table.rows.push_back({row.group, std::to_string(row.validators), std::to_string(row.records),
                                      pct(row.achieved_pct)});
            break;
        }
        case ReportKind::missed_flags: {
            require(!log.performances.empty(), "epoch_performance");
            std::vector<EpochPerformance> recs;
            for (const auto& p : log.performances)
                if (in_window(spec, p.epoch * spec.slots_per_epoch)) recs.push_back(p);
            require(!recs.empty(), "epoch_performance (in window)");
            table.title = "Average missed attestation flags";
            table.columns = {"group", "attestations", "missed_source_pct", "missed_target_pct", "missed_head_pct"};
            for (const auto& row : aggregate_stats(recs, spec.grouping))
                table.rows.push_back({row.group, std::to_string(row.records), pct(100.0 * row.missed_source_ratio),
                                      pct(100.0 * row.missed_target_ratio), pct(100.0 * row.missed_head_ratio)});
            break;
        }
        case ReportKind::missed_blocks: {
            require(!log.performances.empty(), "epoch_performance");
            std::vector<EpochPerformance> recs;
            for (const auto& p : log.performances)
                if (in_window(spec, p.epoch * spec.slots_per_epoch)) recs.push_back(p);
            require(!recs.empty(), "epoch_performance (in window)");
            table.title = "Missed block proposals";
            table.columns = {"group", "assigned", "fulfilled", "missed", "missed_pct"};
            for (const auto& row : aggregate_stats(recs, spec.grouping))
                table.rows.push_back({row.group, std::to_string(row.proposals_assigned),
                                      std::to_string(row.proposals_fulfilled),
                                      std::to_string(row.proposals_assigned - row.proposals_fulfilled),
                                      pct(100.0 * row.missed_proposal_ratio)});
            break;
        }
        case ReportKind::reorgs: {
            require(log.count_by_kind.count("reorg") > 0, "reorg");
            std::vector<ReorgEvent> events;
            for (const auto& ev : log.reorgs)
                if (in_window(spec, ev.slot)) events.push_back(ev);
            table.title = "Chain reorganizations";
            table.columns = {"group", "events", "known_depth_events", "mean_depth"};
            for (const auto& row : reorg_stats(events, spec.grouping))
                table.rows.push_back({row.group, std::to_string(row.events), std::to_string(row.known_depth_events),
                                      fmt("%.1f", row.mean_known_depth)});
            break;
        }
        case ReportKind::block_scores: {
            require(!log.block_scores.empty(), "block_score");
            // Per-slot maxima over candidates normalize each slot to its best.
            std::map<Slot, double> slot_max;
            for (const auto& rec : log.block_scores)
                if (!rec.canonical && in_window(spec, rec.slot))
                    slot_max[rec.slot] = std::max(slot_max[rec.slot], rec.score.score);
            struct Acc {
                size_t blocks = 0;
                double score = 0;
                double norm = 0;
                size_t norm_n = 0;
                double new_votes = 0;
                double new_heads = 0;
            };
            std::map<std::string, Acc> groups;
            for (const auto& rec : log.block_scores) {
                if (rec.canonical || !in_window(spec, rec.slot)) continue;
                Acc& acc = groups[group_key(rec.source, spec.grouping)];
                acc.blocks += 1;
                acc.score += rec.score.score;
                acc.new_votes += rec.score.new_votes;
                acc.new_heads += rec.score.new_head;
                if (slot_max[rec.slot] > 0) {
                    acc.norm += rec.score.score / slot_max[rec.slot];
                    acc.norm_n += 1;
                }
            }
            require(!groups.empty(), "block_score (candidate, in window)");
            table.title = "Average block score per group (candidate blocks)";
            table.columns = {"group", "blocks", "mean_score", "mean_score_norm", "mean_new_votes", "mean_new_heads"};
            for (const auto& [group, acc] : groups) {
                const double n = static_cast<double>(acc.blocks);
                table.rows.push_back({group, std::to_string(acc.blocks), fmt("%.4f", acc.score / n),
                                      fmt("%.4f", acc.norm_n ? acc.norm / static_cast<double>(acc.norm_n) : 0.0),
                                      fmt("%.1f", acc.new_votes / n), fmt("%.1f", acc.new_heads / n)});
            }
            break;
        }
        case ReportKind::arrival_cdf: {
            require(!log.arrivals.empty(), "arrival");
            std::map<std::string, std::vector<WallMs>> groups;
            for (const auto& rec : log.arrivals)
                if (rec.kind == ArrivalKind::block && in_window(spec, rec.slot))
                    groups[group_key(rec.source, spec.grouping)].push_back(rec.arrival_offset_ms);
            require(!groups.empty(), "arrival (block, in window)");
            table.title = "Block arrival CDF (nearest-rank percentiles, ms)";
            table.columns = {"group", "percentile", "offset_ms"};
            for (const auto& [group, offsets] : groups) {
                const auto cdf = latency_cdf(offsets);
                if (!cdf) continue;
                for (const auto& point : cdf->points)
                    table.rows.push_back({group, "p" + std::to_string(point.percentile),
                                          std::to_string(point.offset_ms)});
                table.rows.push_back({group, "mean", fmt("%.1f", cdf->mean_ms)});
                table.rows.push_back({group, "samples", std::to_string(cdf->samples)});
            }
            break;
        }
        case ReportKind::out_of_sync: {
            require(!log.sync_spans.empty(), "sync_span");
            struct Acc {
                SourceLabel label;
                std::uint64_t measured = 0;
                std::uint64_t out = 0;
            };
            std::map<std::string, Acc> nodes;
            for (const auto& span : log.sync_spans) {
                Acc& acc = nodes[span.source.node];
                acc.label = span.source;
                const std::uint64_t len = span.last_slot - span.first_slot + 1;
                acc.measured += len;
                if (span.out_of_sync) acc.out += len;
            }
            table.title = "Out-of-sync share of measured slots per node";
            table.columns = {"node", "location", "client", "measured_slots", "out_of_sync_slots", "out_of_sync_pct"};
            for (const auto& [node, acc] : nodes)
                table.rows.push_back({node, acc.label.location, acc.label.client, std::to_string(acc.measured),
                                      std::to_string(acc.out),
                                      pct(acc.measured ? 100.0 * static_cast<double>(acc.out) / static_cast<double>(acc.measured) : 0.0)});
            break;
        }
        case ReportKind::client_location_heatmap: {
            require(!log.arrivals.empty(), "arrival");
            std::set<std::string> locations;
            std::map<std::string, std::map<std::string, std::pair<double, size_t>>> cells;  // client -> location
            for (const auto& rec : log.arrivals) {
                if (rec.kind != ArrivalKind::block || !in_window(spec, rec.slot)) continue;
                locations.insert(rec.source.location);
                auto& cell = cells[rec.source.client][rec.source.location];
                cell.first += static_cast<double>(rec.arrival_offset_ms);
                cell.second += 1;
            }
            require(!cells.empty(), "arrival (block, in window)");
            table.title = "Mean block arrival offset (ms) per client and location";
            table.columns = {"client"};
            for (const auto& loc : locations) table.columns.push_back(loc);
            for (const auto& [client, row] : cells) {
                std::vector<std::string> cells_out{client};
                for (const auto& loc : locations) {
                    const auto it = row.find(loc);
                    if (it == row.end() || it->second.second == 0) cells_out.push_back("-");
                    else cells_out.push_back(fmt("%.0f", it->second.first / static_cast<double>(it->second.second)));
                }
                table.rows.push_back(std::move(cells_out));
            }
            break;
        }
    }
    return table;
}

inline std::string render_table(const Table& table) {
    std::vector<size_t> widths(table.columns.size());
    for (size_t c = 0; c < table.columns.size(); ++c) widths[c] = table.columns[c].size();
    for (const auto& row : table.rows)
        for (size_t c = 0; c < row.size() && c < widths.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    out << "# " << table.title << "\n";
    auto emit_row = [&](const std::vector<std::string>& cells) {
        for (size_t c = 0; c < cells.size(); ++c) {
            out << (c == 0 ? "" : "  ");
            out << cells[c];
            out << std::string(widths[c] - cells[c].size(), ' ');
        }
        out << "\n";
    };
    emit_row(table.columns);
    size_t total = table.columns.size() > 1 ? 2 * (table.columns.size() - 1) : 0;
    for (size_t w : widths) total += w;
    out << std::string(total, '-') << "\n";
    for (const auto& row : table.rows) emit_row(row);
    return out.str();
}

inline std::string table_to_csv(const Table& table) {
    auto escape = [](const std::string& cell) {
        if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
        std::string out = "\"";
        for (char c : cell) {
            if (c == '"') out += "\"\"";
            else out.push_back(c);
        }
        out += "\"";
        return out;
    };
    std::ostringstream out;
    for (size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << escape(table.columns[c]);
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << escape(row[c]);
        out << "\n";
    }
    return out.str();
}

}  // namespace clperf
