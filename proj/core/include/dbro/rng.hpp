#pragma once

#include <cstdint>
#include <random>

namespace dbro {

/// Purposes for independent random streams. The numeric values are part of
/// the reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
    topology = 1,
    byzantine_selection = 2,
    data = 3,
    init_state = 4,
    sample_index = 5,
    lsvrg_trigger = 6,
    trigger_prob = 7,
    attack = 8,
    sweep_cell = 9,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) noexcept {
    return mix64(mix64(master) ^ mix64(a + 0x632be59bd9b4e019ULL));
}

/// Seed for an independent stream keyed on (master, purpose, a, b).
constexpr std::uint64_t stream_seed(std::uint64_t master, Stream s, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
    return derive_seed(derive_seed(derive_seed(master, static_cast<std::uint64_t>(s)), a), b);
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection, one or more draws.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

} // namespace dbro
