#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "clperf/errors.hpp"
#include "clperf/sse.hpp"
#include "clperf/types.hpp"
#include "clperf/wire.hpp"

namespace clperf {

struct NodeEndpoint {
    std::string base_url;
    SourceLabel label;
    int timeout_ms = 5000;
    int max_retries = 5;
    int backoff_base_ms = 500;
    int backoff_cap_ms = 30000;

    void validate() const {
        if (base_url.empty()) throw ConfigError("endpoint URL must not be empty");
        if (label.node.empty() || label.location.empty() || label.client.empty())
            throw ConfigError("endpoint labels (node, location, client) must not be empty");
        if (timeout_ms <= 0) throw ConfigError("endpoint timeout must be positive");
    }
};

// Endpoints file: one node per line, URL followed by key=value labels.
//   http://127.0.0.1:9001 node=hel-1 location=helsinki client=lighthouse
inline std::vector<NodeEndpoint> parse_endpoints(std::istream& in) {
    std::vector<NodeEndpoint> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream fields(line);
        std::string token;
        NodeEndpoint endpoint;
        bool first = true;
        while (fields >> token) {
            if (first) {
                endpoint.base_url = token;
                first = false;
                continue;
            }
            const size_t eq = token.find('=');
            if (eq == std::string::npos)
                throw ConfigError("endpoints line " + std::to_string(line_no) + ": expected key=value, got " + token);
            const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
            if (key == "node") endpoint.label.node = value;
            else if (key == "location") endpoint.label.location = value;
            else if (key == "client") endpoint.label.client = value;
            else if (key == "timeout_ms") endpoint.timeout_ms = std::stoi(value);
            else throw ConfigError("endpoints line " + std::to_string(line_no) + ": unknown key " + key);
        }
        if (first) continue;  // blank line
        endpoint.validate();
        out.push_back(std::move(endpoint));
    }
    return out;
}

inline std::vector<NodeEndpoint> parse_endpoints_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open endpoints file: " + path);
    return parse_endpoints(in);
}

struct StreamEvent {
    StreamKind kind = StreamKind::block;
    Slot slot = 0;
    Root root{};
    std::uint32_t depth = 0;     // chain_reorg only
    WallMs receipt_ms = 0;       // stamped at socket read, before parsing
    std::string node;
};

enum class StreamItemKind { event, gap, endpoint_down };

struct StreamItem {
    StreamItemKind item = StreamItemKind::event;
    StreamEvent event;
    std::string node;
    WallMs at_ms = 0;
};

inline WallMs system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Streams /eth/v1/events from one node. Events are delivered in wire order;
// a lost connection reconnects with exponential backoff and surfaces a gap
// marker, and an endpoint that stays unreachable past the retry budget
// surfaces an endpoint-down signal (it keeps probing at the backoff cap so a
// recovered node resumes).
class EventSubscriber {
public:
    using Sink = std::function<void(const StreamItem&)>;

    EventSubscriber(NodeEndpoint endpoint, std::vector<StreamKind> topics, Sink sink,
                    std::function<WallMs()> now = system_now_ms)
        : endpoint_(std::move(endpoint)), topics_(std::move(topics)), sink_(std::move(sink)), now_(std::move(now)) {
        endpoint_.validate();
    }

    ~EventSubscriber() { stop(); }

    void start() {
        if (thread_.joinable()) return;
        stopping_ = false;
        thread_ = std::thread([this] { run(); });
    }

    void stop() {
        stopping_ = true;
        wake_.notify_all();
        if (thread_.joinable()) thread_.join();
    }

private:
    void run() {
        int failures = 0;
        bool had_connection = false;
        bool down_signalled = false;
        while (!stopping_) {
            const bool got_events = stream_once();
            if (stopping_) break;
            if (got_events) {
                // A broken stream that had delivered events: emit a gap so
                // consumers know the sequence is not contiguous.
                emit(StreamItem{StreamItemKind::gap, {}, endpoint_.label.node, now_()});
                had_connection = true;
                failures = 0;
                down_signalled = false;
            } else {
                ++failures;
                if (failures >= endpoint_.max_retries && !down_signalled) {
                    emit(StreamItem{StreamItemKind::endpoint_down, {}, endpoint_.label.node, now_()});
                    down_signalled = true;
                }
            }
            const int shift = std::min(failures, 6);
            const int backoff = std::min(endpoint_.backoff_base_ms * (1 << shift), endpoint_.backoff_cap_ms);
            std::unique_lock<std::mutex> lock(mutex_);
            wake_.wait_for(lock, std::chrono::milliseconds(backoff), [this] { return stopping_.load(); });
        }
    }

    // One connection attempt; returns whether any event arrived.
    bool stream_once() {
        httplib::Client client(endpoint_.base_url);
        client.set_connection_timeout(0, endpoint_.timeout_ms * 1000);
        client.set_read_timeout(endpoint_.timeout_ms / 1000, (endpoint_.timeout_ms % 1000) * 1000);

        std::string path = "/eth/v1/events?topics=";
        for (size_t i = 0; i < topics_.size(); ++i) path += std::string(i ? "," : "") + stream_topic(topics_[i]);

        SseParser parser;
        bool any = false;
        client.Get(path, [&](const char* data, size_t len) {
            const WallMs stamp = now_();  // socket-read time, before parsing
            parser.feed(std::string_view(data, len), [&](const SseEvent& frame) {
                if (deliver(frame, stamp)) any = true;
            });
            return !stopping_;
        });
        return any;
    }

    bool deliver(const SseEvent& frame, WallMs stamp) {
        StreamEvent event;
        try {
            event.kind = stream_kind_from_topic(frame.event);
            const auto payload = wire::json::parse(frame.data);
            event.slot = wire::field_u64(payload, "slot");
            event.root = wire::field_root(payload, {"block", "root", "new_head_block"});
            if (event.kind == StreamKind::chain_reorg && payload.contains("depth"))
                event.depth = static_cast<std::uint32_t>(wire::as_u64(payload.at("depth"), "depth"));
        } catch (const std::exception&) {
            return false;  // unknown or malformed frame: skip
        }
        event.receipt_ms = std::max(stamp, last_receipt_);  // monotone per stream
        last_receipt_ = event.receipt_ms;
        event.node = endpoint_.label.node;
        emit(StreamItem{StreamItemKind::event, event, endpoint_.label.node, event.receipt_ms});
        return true;
    }

    void emit(const StreamItem& item) { sink_(item); }

    NodeEndpoint endpoint_;
    std::vector<StreamKind> topics_;
    Sink sink_;
    std::function<WallMs()> now_;
    std::atomic<bool> stopping_{false};
    std::mutex mutex_;
    std::condition_variable wake_;
    std::thread thread_;
    WallMs last_receipt_ = 0;
};

struct SyncStatus {
    bool is_syncing = false;
    Slot head_slot = 0;
};

// Single request-response; empty on timeout or connection failure, which the
// caller treats as endpoint-down.
inline std::optional<SyncStatus> get_sync_status(const NodeEndpoint& endpoint) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(0, endpoint.timeout_ms * 1000);
    client.set_read_timeout(endpoint.timeout_ms / 1000, (endpoint.timeout_ms % 1000) * 1000);
    const auto res = client.Get("/eth/v1/node/syncing");
    if (!res || res->status != 200) return std::nullopt;
    try {
        const auto j = wire::json::parse(res->body);
        const auto& data = j.at("data");
        return SyncStatus{data.at("is_syncing").get<bool>(),
                          wire::field_u64(data, "head_slot")};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

struct BlockProductionResult {
    enum class Status { ok, out_of_sync, timeout, protocol_error, endpoint_down } status = Status::endpoint_down;
    std::optional<BlockSummary> block;
};

// Asks one node to produce a block for the slot. A response that lands after
// the deadline is useless for proposing and counts as unavailable(timeout).
inline BlockProductionResult request_block_production(const NodeEndpoint& endpoint, Slot slot, WallMs deadline_ms,
                                                      std::function<WallMs()> now = system_now_ms) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(0, static_cast<time_t>(deadline_ms) * 1000);
    client.set_read_timeout(static_cast<time_t>(deadline_ms / 1000), static_cast<time_t>((deadline_ms % 1000) * 1000));

    const WallMs started = now();
    const auto res = client.Get("/eth/v2/validator/blocks/" + std::to_string(slot) + "?summary=true");
    const WallMs elapsed = now() - started;

    BlockProductionResult result;
    if (!res) {
        result.status = elapsed >= deadline_ms ? BlockProductionResult::Status::timeout
                                               : BlockProductionResult::Status::endpoint_down;
        return result;
    }
    if (elapsed > deadline_ms) {
        result.status = BlockProductionResult::Status::timeout;
        return result;
    }
    if (res->status == 503) {
        result.status = BlockProductionResult::Status::out_of_sync;
        return result;
    }
    if (res->status != 200) {
        result.status = BlockProductionResult::Status::protocol_error;
        return result;
    }
    try {
        BlockSummary block = wire::block_summary_from_json(wire::json::parse(res->body));
        block.source = endpoint.label;
        result.block = std::move(block);
        result.status = BlockProductionResult::Status::ok;
    } catch (const std::exception&) {
        result.status = BlockProductionResult::Status::protocol_error;
    }
    return result;
}

// Canonical block summary lookup; empty for a missed slot or an unreachable
// node.
inline std::optional<BlockSummary> fetch_block(const NodeEndpoint& endpoint, Slot slot) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(0, endpoint.timeout_ms * 1000);
    client.set_read_timeout(endpoint.timeout_ms / 1000, (endpoint.timeout_ms % 1000) * 1000);
    const auto res = client.Get("/eth/v2/beacon/blocks/" + std::to_string(slot) + "?summary=true");
    if (!res || res->status != 200) return std::nullopt;
    try {
        BlockSummary block = wire::block_summary_from_json(wire::json::parse(res->body));
        block.source = endpoint.label;
        return block;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Fans block-production requests out to every endpoint at once and joins
// them under one deadline. Requests are keyed by (node, slot): a duplicate
// request while one is in flight coalesces onto the same result.
class Multiplexer {
public:
    explicit Multiplexer(std::vector<NodeEndpoint> endpoints) : endpoints_(std::move(endpoints)) {
        for (const auto& e : endpoints_) e.validate();
    }

    const std::vector<NodeEndpoint>& endpoints() const { return endpoints_; }

    std::map<std::string, BlockProductionResult> request_candidates(Slot slot, WallMs deadline_ms) {
        std::vector<std::pair<std::string, std::shared_future<BlockProductionResult>>> pending;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            for (const auto& endpoint : endpoints_) {
                const auto key = std::make_pair(endpoint.label.node, slot);
                auto it = in_flight_.find(key);
                if (it == in_flight_.end()) {
                    auto future = std::async(std::launch::async, [endpoint, slot, deadline_ms] {
                                      return request_block_production(endpoint, slot, deadline_ms);
                                  }).share();
                    it = in_flight_.emplace(key, std::move(future)).first;
                }
                pending.emplace_back(endpoint.label.node, it->second);
            }
        }
        std::map<std::string, BlockProductionResult> results;
        for (auto& [node, future] : pending) results[node] = future.get();
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& endpoint : endpoints_) in_flight_.erase({endpoint.label.node, slot});
        return results;
    }

private:
    std::vector<NodeEndpoint> endpoints_;
    std::mutex mutex_;
    std::map<std::pair<std::string, Slot>, std::shared_future<BlockProductionResult>> in_flight_;
};

}  // namespace clperf
