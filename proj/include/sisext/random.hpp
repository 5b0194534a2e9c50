#pragma once

// Counter-based random streams. A stream is addressed by (master_seed,
// stream_id) and its output depends on nothing else, so replicates can be
// scheduled on any number of workers in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sisext {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

struct RandomSource {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const RandomSource&, const RandomSource&) = default;
};

/// UniformRandomBitGenerator over one (master_seed, stream_id) stream.
///
/// Key = master_seed, counter = (stream_id, block index); each block yields
/// two 64-bit words.
class StreamEngine {
public:
    using result_type = std::uint64_t;

    explicit StreamEngine(RandomSource src) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (used_ == 2) refill();
        return buffer_[used_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    /// Exp(rate) variate.
    double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

    /// Number of failures before the first success, success probability q in (0, 1].
    std::uint64_t geometric(double q) noexcept;

    const RandomSource& source() const noexcept { return src_; }
    std::uint64_t blocks_consumed() const noexcept { return block_; }

private:
    void refill() noexcept;

    RandomSource src_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    unsigned used_ = 2;
};

}  // namespace sisext
