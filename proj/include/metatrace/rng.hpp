#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metatrace {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Independent stream derived from a run's master seed and a consumer name, so adding
/// a consumer never shifts the draws of another.
inline Rng make_stream(std::uint64_t master_seed, std::string_view name) {
    return Rng(mix64(master_seed ^ mix64(fnv1a(name))));
}

/// Uniform in [0,1) from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline int uniform_int(Rng& rng, int n) {
    return static_cast<int>(uniform01(rng) * n);
}

}  // namespace metatrace
