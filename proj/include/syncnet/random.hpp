#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

// std::mt19937_64 output is fixed by the standard but the <random>
// distributions are not, so seeded results would differ between standard
// libraries. These helpers only use the raw engine output.
namespace syncnet::rng {

using Engine = std::mt19937_64;

// Uniform integer in [0, n). n must be positive.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::span<T> items, Engine& eng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(below(eng, i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace syncnet::rng
