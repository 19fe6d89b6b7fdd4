#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace clperf {

// Server-sent-events framing: `event:` kind line, `data:` payload line, blank
// separator. This is the wire format of the event stream endpoint.
struct SseEvent {
    std::string event;
    std::string data;
};

inline std::string sse_frame(const std::string& event, const std::string& data) {
    return "event: " + event + "\ndata: " + data + "\n\n";
}

// Incremental parser; feed() accepts arbitrary chunk boundaries and emits one
// callback per complete frame. Comment lines and unknown fields are skipped,
// CRLF tolerated.
class SseParser {
public:
    void feed(std::string_view chunk, const std::function<void(const SseEvent&)>& sink) {
        buffer_.append(chunk.data(), chunk.size());
        size_t start = 0;
        for (;;) {
            const size_t nl = buffer_.find('\n', start);
            if (nl == std::string::npos) break;
            std::string_view line(buffer_.data() + start, nl - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            consume_line(line, sink);
            start = nl + 1;
        }
        buffer_.erase(0, start);
    }

private:
    void consume_line(std::string_view line, const std::function<void(const SseEvent&)>& sink) {
        if (line.empty()) {
            if (!current_.event.empty() || !current_.data.empty()) sink(current_);
            current_ = {};
            return;
        }
        if (line.front() == ':') return;  // comment / keep-alive
        const size_t colon = line.find(':');
        if (colon == std::string_view::npos) return;
        std::string_view field = line.substr(0, colon);
        std::string_view value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        if (field == "event") current_.event.assign(value);
        else if (field == "data") {
            if (!current_.data.empty()) current_.data.push_back('\n');
            current_.data.append(value);
        }
    }

    std::string buffer_;
    SseEvent current_;
};

}  // namespace clperf
