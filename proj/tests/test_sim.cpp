#include "sisext/analytic.hpp"
#include "sisext/mc.hpp"
#include "sisext/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace sisext;

namespace {

std::vector<double> logistic_times(const ModelParams& p, State x0, std::size_t n, std::uint64_t seed) {
    std::vector<double> out(n);
    const InitialCondition ic(p, x0);
    parallel_for(n, 0, [&](std::size_t i) {
        out[i] = *sample_extinction_logistic(p, ic, RandomSource{seed, i}, 1e6).extinction_time;
    });
    return out;
}

bool within_3se(std::span<const double> xs, double expected) {
    const auto s = summarize(xs);
    return std::abs(s.mean - expected) <= 3.0 * s.standard_error;
}

}  // namespace

TEST_CASE("logistic sampler: trivial starts") {
    const ModelParams p(10, 0.5, 1.0);
    const auto traj = sample_extinction_logistic(p, InitialCondition(p, 0), RandomSource{1, 0}, 10.0, true);
    REQUIRE(traj.extinction_time.has_value());
    CHECK(*traj.extinction_time == 0.0);
    CHECK(traj.event_times.empty());
    CHECK(traj.event_count == 0);
    CHECK_THROWS_AS(sample_extinction_logistic(p, InitialCondition(p, 3), RandomSource{}, 0.0), std::domain_error);
}

TEST_CASE("logistic sampler: exponential law for N = 1") {
    const ModelParams p(1, 0.8, 1.7);
    const auto times = logistic_times(p, 1, 100'000, 11);
    CHECK(within_3se(times, 1.0 / 1.7));
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const double ks = ks_distance(sorted, [](double t) { return -std::expm1(-1.7 * t); });
    CHECK(ks < 0.01);
}

TEST_CASE("logistic sampler: pure death gives harmonic means") {
    const ModelParams p(100, 0.0, 1.0);
    const auto times = logistic_times(p, 50, 100'000, 12);
    double h = 0.0;
    for (int j = 1; j <= 50; ++j) h += 1.0 / j;
    CHECK(h == doctest::Approx(4.499).epsilon(1e-3));
    CHECK(within_3se(times, h));
}

TEST_CASE("logistic sampler: mean matches the exact mean") {
    const ModelParams p(100, 0.5, 1.0);
    const auto times = logistic_times(p, 100, 100'000, 13);
    CHECK(within_3se(times, exact_mean_extinction(p, 100)));
}

TEST_CASE("trajectory invariants") {
    const ModelParams p(50, 1.4, 1.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto traj = sample_extinction_logistic(p, InitialCondition(p, 10), RandomSource{5, s}, 50.0, true);
        REQUIRE(traj.states.size() == traj.event_times.size());
        CHECK(traj.event_count == traj.states.size());
        State prev = 10;
        double t_prev = 0.0;
        for (std::size_t i = 0; i < traj.states.size(); ++i) {
            CHECK(std::abs(traj.states[i] - prev) == 1);
            CHECK(traj.event_times[i] > t_prev);
            CHECK(traj.states[i] >= 0);
            CHECK(traj.states[i] <= p.N());
            if (traj.states[i] == 0) CHECK(i + 1 == traj.states.size());
            prev = traj.states[i];
            t_prev = traj.event_times[i];
        }
        if (traj.censored) {
            CHECK_FALSE(traj.extinction_time.has_value());
            CHECK(traj.end_time == 50.0);
        } else {
            CHECK(*traj.extinction_time == t_prev);
        }
    }
}

TEST_CASE("same source, same path") {
    const ModelParams p(200, 0.9, 1.0);
    const InitialCondition ic(p, 150);
    const auto a = sample_extinction_logistic(p, ic, RandomSource{77, 3}, 1e4, true);
    const auto b = sample_extinction_logistic(p, ic, RandomSource{77, 3}, 1e4, true);
    const auto fast = sample_extinction_logistic(p, ic, RandomSource{77, 3}, 1e4, false);
    CHECK(a.event_times == b.event_times);
    CHECK(a.states == b.states);
    CHECK(fast.extinction_time == a.extinction_time);
    CHECK(fast.event_count == a.event_count);
}

TEST_CASE("trajectory CSV") {
    const ModelParams p(3, 0.5, 1.0);
    const auto traj = sample_extinction_logistic(p, InitialCondition(p, 2), RandomSource{1, 1}, 100.0, true);
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,state");
    std::getline(in, line);
    CHECK(line == "0,2");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == traj.event_times.size());
}

TEST_CASE("linear sampler") {
    const ModelParams p(1, 0.7, 1.0);
    const auto zero = sample_extinction_linear(p, 0, RandomSource{}, 1.0, 10);
    CHECK(*zero.extinction_time == 0.0);
    CHECK_THROWS_AS(sample_extinction_linear(p, 5, RandomSource{}, 1.0, 5), std::domain_error);
    CHECK_THROWS_AS(sample_extinction_linear(p, -1, RandomSource{}, 1.0, 5), std::domain_error);
    CHECK(default_linear_cap(50) == 500);
    CHECK(default_linear_cap(0) == 10);

    constexpr std::size_t n = 100'000;
    std::vector<double> ext(n);
    std::vector<char> cap_hit(n);
    parallel_for(n, 0, [&](std::size_t i) {
        const auto traj = sample_extinction_linear(p, 50, RandomSource{21, i}, 1e4, 200);
        ext[i] = traj.extinction_time.value_or(INFINITY);
        cap_hit[i] = traj.cap_hit;
    });
    const double p_hat = empirical_cdf(ext, 10.0);
    CHECK(std::abs(p_hat - linear_extinction_cdf(p, 50, 10.0)) <= 3.0 * std::sqrt(p_hat * (1 - p_hat) / n));
    const double cap_freq = static_cast<double>(std::count(cap_hit.begin(), cap_hit.end(), 1)) / n;
    const double bound = ruin_escape_probability(p, 50, 200).geometric_bound;
    CHECK(cap_freq <= bound + 3.0 * std::sqrt(cap_freq * (1 - cap_freq) / n));
}

TEST_CASE("discrete chain probabilities") {
    const ModelParams p(100, 0.5, 1.0);
    const DiscreteChainParams d(2.0);
    const auto s = discrete_step_probabilities(p, d, 50);
    CHECK(s.up == doctest::Approx(12.5 / 300.0).epsilon(1e-14));
    CHECK(s.down == doctest::Approx(50.0 / 300.0).epsilon(1e-14));
    CHECK(s.hold == doctest::Approx(0.7916667).epsilon(1e-7));
    CHECK(d.delta(p) == doctest::Approx(1.0 / 300.0));
    CHECK_THROWS_AS(DiscreteChainParams(1.99), std::domain_error);

    for (const ModelParams& q : {p, ModelParams(37, 3.0, 0.2), ModelParams(5, 0.0, 1.0)}) {
        for (State x = 0; x <= q.N(); ++x) {
            const auto sp = discrete_step_probabilities(q, d, x);
            CHECK(sp.up + sp.down + sp.hold == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(sp.hold >= 0.5);
        }
    }
    StreamEngine rng(RandomSource{1, 2});
    for (int i = 0; i < 100; ++i) CHECK(step_discrete(p, d, 0, rng) == 0);
}

TEST_CASE("discrete chain one-step drift") {
    const ModelParams p(100, 0.5, 1.0);
    const DiscreteChainParams d(2.0);
    constexpr State x = 50;
    constexpr int n = 1'000'000;
    StreamEngine rng(RandomSource{9, 9});
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(step_discrete(p, d, x, rng) - x);
    const double drift = -((p.mu() - p.lambda()) * x + p.lambda() * x * x / 100.0) / (2.0 * 1.5 * 100.0);
    const auto s = discrete_step_probabilities(p, d, x);
    const double var = s.up + s.down - (s.up - s.down) * (s.up - s.down);
    CHECK(std::abs(sum / n - drift) <= 3.0 * std::sqrt(var / n));
}

TEST_CASE("geometric skipping preserves the discrete law") {
    // exact law after m steps by propagation, against run_discrete
    const ModelParams p(20, 0.9, 1.0);
    const DiscreteChainParams d(2.5);
    constexpr std::uint64_t m = 150;
    std::vector<double> law(21, 0.0);
    law[12] = 1.0;
    for (std::uint64_t k = 0; k < m; ++k) {
        std::vector<double> next(21, 0.0);
        for (State x = 0; x <= 20; ++x) {
            const auto s = discrete_step_probabilities(p, d, x);
            next[x] += law[x] * s.hold;
            if (x < 20) next[x + 1] += law[x] * s.up;
            if (x > 0) next[x - 1] += law[x] * s.down;
        }
        law.swap(next);
    }
    constexpr std::size_t n = 200'000;
    std::vector<double> counts(21, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        StreamEngine rng(RandomSource{31, i});
        counts[run_discrete(p, d, 12, m, rng)] += 1.0;
    }
    double chi2 = 0.0;
    int cells = 0;
    for (std::size_t x = 0; x <= 20; ++x) {
        const double expected = law[x] * n;
        if (expected < 5.0) continue;
        chi2 += (counts[x] - expected) * (counts[x] - expected) / expected;
        ++cells;
    }
    // 99.9% quantile of chi-square with up to 20 degrees of freedom is below 46
    CHECK(cells > 5);
    CHECK(chi2 < 46.0);
}
