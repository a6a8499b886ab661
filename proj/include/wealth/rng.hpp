#pragma once

// Counter-based random numbers (Philox4x32-10). A draw is a pure function of
// (seed, stream, counter), so results never depend on how work is split
// across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace wealth::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr Block philox4x32_10(Block ctr, Key key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

/// Maps 52 random bits to the open interval (0, 1). With 53 bits the top
/// midpoint 1 - 2^-54 would round to 1.0.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Stateless generator addressed by (stream, index_a, index_b).
/// `stream` separates independent uses (firm shocks, household noise, ...).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Block block(std::uint32_t stream, std::uint64_t a, std::uint32_t b) const noexcept {
        return philox4x32_10({b, static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), stream},
                             key_);
    }

    double uniform(std::uint32_t stream, std::uint64_t a, std::uint32_t b) const noexcept {
        const Block r = block(stream, a, b);
        return to_open_unit(r[0], r[1]);
    }

    /// Standard normal via Box-Muller on one Philox block.
    double normal(std::uint32_t stream, std::uint64_t a, std::uint32_t b) const noexcept {
        const Block r = block(stream, a, b);
        const double u1 = to_open_unit(r[0], r[1]);
        const double u2 = to_open_unit(r[2], r[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    Key key_;
};

/// Sequential engine over a counter stream; satisfies UniformRandomBitGenerator.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(std::uint64_t seed, std::uint32_t stream) noexcept : rng_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 4) {
            buffer_ = rng_.block(stream_, counter_++, 0);
            used_ = 0;
        }
        return buffer_[used_++];
    }

    double uniform() noexcept {
        const std::uint32_t hi = (*this)();
        const std::uint32_t lo = (*this)();
        return to_open_unit(hi, lo);
    }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        for (;;) {
            const std::uint64_t x = std::uint64_t{(*this)()} << 32 | (*this)();
            if (x < limit) return x % bound;
        }
    }

    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    CounterRng rng_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    int used_ = 4;
};

/// Fisher-Yates with the engine's own bounded draws (std::shuffle is not
/// specified bit-for-bit across standard libraries).
template <typename It>
void shuffle(It first, It last, PhiloxEngine& engine) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = engine.below(i);
        std::swap(first[i - 1], first[j]);
    }
}

}  // namespace wealth::rng
