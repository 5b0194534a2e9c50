#include "sisext/random.hpp"

namespace sisext {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

StreamEngine::StreamEngine(RandomSource src) noexcept : src_(src) {}

void StreamEngine::refill() noexcept {
    const Philox4x32::Key key{static_cast<std::uint32_t>(src_.master_seed),
                              static_cast<std::uint32_t>(src_.master_seed >> 32)};
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(src_.stream_id),
                                  static_cast<std::uint32_t>(src_.stream_id >> 32),
                                  static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32)};
    const auto out = Philox4x32::block(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
    used_ = 0;
}

std::uint64_t StreamEngine::geometric(double q) noexcept {
    if (q >= 1.0) return 0;
    const double g = std::floor(std::log(uniform_pos()) / std::log1p(-q));
    constexpr double cap = 9.0e18;
    return g >= cap ? static_cast<std::uint64_t>(cap) : static_cast<std::uint64_t>(g);
}

}  // namespace sisext
