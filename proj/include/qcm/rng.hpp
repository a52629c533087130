#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qcm::rng {

// SplitMix64 step (Vigna). Used only to derive stream seeds, not as the
// sampling engine itself.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a list of stream ids.
/// Jobs keyed by distinct id tuples get independent, schedule-invariant
/// streams, so parallel runs stay bit-reproducible.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = seed ^ 0xA3C59AC2F05EE2B1ull;
    std::uint64_t h = splitmix64(s);
    for (std::uint64_t id : ids) {
        s = h ^ (id + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2));
        h = splitmix64(s);
    }
    return h;
}

using Engine = std::mt19937_64;

inline Engine engine(std::uint64_t seed, std::initializer_list<std::uint64_t> ids = {}) {
    return Engine(derive(seed, ids));
}

} // namespace qcm::rng
