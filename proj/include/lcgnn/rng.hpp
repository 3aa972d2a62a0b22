#pragma once

#include <cstdint>
#include <random>

namespace lcgnn {

// Random streams used across the project.
//
// Every stream is a std::mt19937_64 (its output sequence is fixed by the C++
// standard) seeded with splitmix64(seed ^ splitmix64(stream)). Uniform reals
// take the top 53 bits of one engine output: u = (x >> 11) * 2^-53, so
// u ∈ [0, 1). No std::*_distribution is used because those are not
// portable across standard library implementations.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream identifiers, combined with a user seed.
enum class Stream : std::uint64_t {
    glorot_w0 = 1,
    glorot_w1 = 2,
    dropout = 3,
    split = 4,
};

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(splitmix64(seed ^ splitmix64(stream))) {}
    Rng(std::uint64_t seed, Stream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

/// Derives the seed of a sub-stream, e.g. one per training epoch.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(seed + 0x632BE59BD9B4E019ULL * (index + 1));
}

}  // namespace lcgnn
