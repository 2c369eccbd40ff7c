#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace btts::rng {

// FNV-1a, used for config fingerprints and for deriving per-step RNG
// streams. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(const void* bytes, std::size_t n,
                           std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a_str(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h = 1469598103934665603ull) {
    return fnv1a(&v, sizeof(v), h);
}

// Derive an independent mt19937_64 stream from (seed, tag, a, b). All
// randomness in training and synthesis goes through streams like this,
// so any step can be replayed from the seed alone.
inline std::mt19937_64 stream(std::uint64_t seed, std::string_view tag,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a_u64(seed);
    h = fnv1a_str(tag, h);
    h = fnv1a_u64(a, h);
    h = fnv1a_u64(b, h);
    return std::mt19937_64(h);
}

// Uniform doubles mapped by hand; std::uniform_real_distribution is not
// pinned by the standard, the raw mt19937_64 output is.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * (1.0 / 9007199254740992.0);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

}  // namespace btts::rng
