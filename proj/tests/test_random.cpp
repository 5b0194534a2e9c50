#include "sisext/random.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace sisext;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    StreamEngine a(RandomSource{42, 7}), b(RandomSource{42, 7}), c(RandomSource{42, 8}), d(RandomSource{43, 7});
    std::vector<std::uint64_t> va, vb, vc, vd;
    for (int i = 0; i < 1000; ++i) {
        va.push_back(a());
        vb.push_back(b());
        vc.push_back(c());
        vd.push_back(d());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(a.blocks_consumed() == 500);
    std::set<std::uint64_t> unique(va.begin(), va.end());
    CHECK(unique.size() == va.size());
}

TEST_CASE("uniform, exponential and geometric transforms") {
    StreamEngine rng(RandomSource{1, 0});
    constexpr int n = 200'000;
    double sum_u = 0.0, sum_e = 0.0, sum_g = 0.0;
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum_u += u;
        sum_e += rng.exponential(2.0);
        sum_g += static_cast<double>(rng.geometric(0.25));
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    // 3-sigma bands
    CHECK(std::abs(sum_u / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sum_e / n - 0.5) < 3.0 * 0.5 / std::sqrt(n));
    const double g_mean = 0.75 / 0.25, g_sd = std::sqrt(0.75) / 0.25;
    CHECK(std::abs(sum_g / n - g_mean) < 3.0 * g_sd / std::sqrt(n));
    CHECK(rng.geometric(1.0) == 0);
    CHECK(rng.uniform_pos() > 0.0);
}
