#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "clperf/errors.hpp"
#include "clperf/rng.hpp"

namespace clperf {

using Slot = std::uint64_t;
using Epoch = std::uint64_t;
using ValidatorId = std::uint32_t;

// Milliseconds on the wall clock (or since genesis, depending on context).
// Sub-second time is integer milliseconds everywhere; floats never carry time.
using WallMs = std::int64_t;

// Opaque 32-byte block identifier. Never derived from block contents; the
// simulator mints them and real APIs hand them to us.
struct Root : std::array<std::uint8_t, 32> {
    bool is_zero() const {
        for (auto b : *this)
            if (b != 0) return false;
        return true;
    }

    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out = "0x";
        out.reserve(66);
        for (auto b : *this) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xf]);
        }
        return out;
    }

    static Root from_hex(const std::string& text) {
        std::string s = text;
        if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) s = s.substr(2);
        if (s.size() != 64) throw DataError("root hex must be 32 bytes: " + text);
        Root out{};
        auto nibble = [&](char c) -> std::uint8_t {
            if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
            throw DataError("bad hex digit in root: " + text);
        };
        for (size_t i = 0; i < 32; ++i) out[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
        return out;
    }

    // Deterministic opaque root from a pair of tags.
    static Root derive(std::uint64_t a, std::uint64_t b = 0) {
        Root out{};
        std::uint64_t state = mix64({a, b});
        for (int w = 0; w < 4; ++w) {
            std::uint64_t x = splitmix64(state);
            for (int i = 0; i < 8; ++i) out[static_cast<size_t>(w * 8 + i)] = static_cast<std::uint8_t>(x >> (8 * i));
        }
        return out;
    }
};

// Who produced a sample: which monitored node, where it runs, which client
// implementation it is labeled as.
struct SourceLabel {
    std::string node;
    std::string location;
    std::string client;

    bool operator==(const SourceLabel&) const = default;
};

}  // namespace clperf
