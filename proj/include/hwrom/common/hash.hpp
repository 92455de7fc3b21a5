#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hwrom
{
    // 64-bit FNV-1a; used for snapshot, state and config fingerprints.
    std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

    // Lower-case 16-digit hex.
    std::string hex64(std::uint64_t value);

    // SplitMix64 finalizer. Counter-based randomness: mix(seed, counter)
    // gives the same value no matter what else was drawn before.
    std::uint64_t splitmix64(std::uint64_t x) noexcept;
    std::uint64_t counter_random(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept;

    // Uniform in [0, 1) from the top 53 bits.
    double unit_interval(std::uint64_t bits) noexcept;
}
