#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace clperf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-sensitive combine of several 64-bit words into one.
inline std::uint64_t mix64(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x6a09e667f3bcc908ULL;
    std::uint64_t acc = 0;
    for (std::uint64_t p : parts) {
        state ^= p;
        acc ^= splitmix64(state);
        acc = (acc << 23) | (acc >> 41);
    }
    return splitmix64(acc);
}

// 32-byte opaque seed used for duty assignment.
using Seed32 = std::array<std::uint8_t, 32>;

inline Seed32 seed32_from_u64(std::uint64_t value) {
    Seed32 out{};
    std::uint64_t state = value;
    for (int w = 0; w < 4; ++w) {
        std::uint64_t x = splitmix64(state);
        for (int b = 0; b < 8; ++b) out[static_cast<size_t>(w * 8 + b)] = static_cast<std::uint8_t>(x >> (8 * b));
    }
    return out;
}

inline std::array<std::uint64_t, 4> seed32_words(const Seed32& seed) {
    std::array<std::uint64_t, 4> words{};
    for (int w = 0; w < 4; ++w)
        for (int b = 7; b >= 0; --b) words[static_cast<size_t>(w)] = (words[static_cast<size_t>(w)] << 8) | seed[static_cast<size_t>(w * 8 + b)];
    return words;
}

// Deterministic RNG with explicit algorithms only, so identical inputs give
// byte-identical outputs on every platform. mt19937_64's output sequence is
// fixed by the standard; index draws use rejection sampling instead of
// std::uniform_int_distribution (whose mapping is implementation-defined).
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    // Fisher-Yates, explicit so results do not depend on std::shuffle's
    // unspecified algorithm.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Counter-based sampling: each draw is keyed by the values that identify the
// sample (seed, message id, edge, ...), never by draw order. Changing one
// region's parameters therefore does not perturb any other sample in the run,
// which is what the monotone-degradation ordering tests rely on.
namespace keyed {

inline double uniform01(std::uint64_t key) {
    // 53 mantissa bits, in (0, 1] so log() is safe.
    return static_cast<double>((mix64({key, 0x9d8f3cull}) >> 11) + 1) * 0x1.0p-53;
}

inline double normal(std::uint64_t key, unsigned attempt = 0) {
    const double u1 = uniform01(mix64({key, 0xa1ull, attempt}));
    const double u2 = uniform01(mix64({key, 0xa2ull, attempt}));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Lognormal parameterized by its median: exp(N(ln median, sigma)).
inline double lognormal_ms(std::uint64_t key, double median_ms, double sigma) {
    if (median_ms <= 0.0) return 0.0;
    return median_ms * std::exp(sigma * normal(key));
}

// Normal(0, sd) resampled until non-negative.
inline double nonneg_normal(std::uint64_t key, double sd) {
    if (sd <= 0.0) return 0.0;
    for (unsigned attempt = 0;; ++attempt) {
        const double z = normal(key, attempt) * sd;
        if (z >= 0.0) return z;
    }
}

}  // namespace keyed

}  // namespace clperf
