#include "sisext/analytic.hpp"
#include "sisext/errors.hpp"
#include "sisext/oracles.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace sisext;

namespace {

// Linear chain extinction by direct simulation of the embedded walk, with
// its own generator so it shares nothing with the library samplers.
double linear_extinction_frequency(double lam, double mu, int x, double t, int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        long y = x;
        double clock = 0.0;
        while (y > 0 && clock <= t) {
            const double rate = (lam + mu) * static_cast<double>(y);
            clock += -std::log1p(-unit(gen)) / rate;
            if (clock > t) break;
            y += unit(gen) * (lam + mu) < lam ? 1 : -1;
        }
        if (y == 0) ++hits;
    }
    return static_cast<double>(hits) / n;
}

// Dense solve of (up_x + down_x) E_x - up_x E_{x+1} - down_x E_{x-1} = 1.
Eigen::VectorXd dense_mean(std::int64_t N, double lam, double mu) {
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i + 1);
        const double up = lam * x * (1.0 - x / static_cast<double>(N));
        const double down = mu * x;
        a(i, i) = up + down;
        if (i + 1 < n) a(i, i + 1) = -up;
        if (i > 0) a(i, i - 1) = -down;
    }
    return a.fullPivLu().solve(b);
}

}  // namespace

TEST_CASE("linear extinction CDF: closed-form cases") {
    const ModelParams p(1, 0.7, 1.0);
    CHECK(linear_extinction_cdf(p, 0, 3.0) == 1.0);
    CHECK(linear_extinction_cdf(p, 0, 0.0) == 1.0);
    CHECK(linear_extinction_cdf(p, 5, 0.0) == 0.0);
    CHECK_THROWS_AS(linear_extinction_cdf(p, -1, 1.0), std::domain_error);
    CHECK_THROWS_AS(linear_extinction_cdf(p, 1, -1.0), std::domain_error);

    const ModelParams death(1, 0.0, 1.7);
    for (int x : {1, 3, 40}) {
        for (double t : {0.1, 1.0, 4.0}) {
            CHECK(linear_extinction_cdf(death, x, t) == doctest::Approx(std::pow(1.0 - std::exp(-1.7 * t), x)).epsilon(1e-13));
        }
    }
    // x* = 1 against the textbook formula
    const double d = 0.3, t = 2.0;
    CHECK(linear_extinction_cdf(p, 1, t) ==
          doctest::Approx(1.0 - d * std::exp(-d * t) / (1.0 - 0.7 * std::exp(-d * t))).epsilon(1e-13));
    // x* large does not underflow to garbage
    const double big = linear_extinction_cdf(ModelParams(1, 0.5, 1.0), 1'000'000, 40.0);
    CHECK(big > 0.0);
    CHECK(big < 1.0);
}

TEST_CASE("linear extinction CDF: Monte Carlo oracle") {
    constexpr int n = 100'000;
    const double p_hat = linear_extinction_frequency(0.7, 1.0, 50, 10.0, n, 12345);
    const double exact = linear_extinction_cdf(ModelParams(1, 0.7, 1.0), 50, 10.0);
    CHECK(std::abs(p_hat - exact) <= 3.0 * std::sqrt(p_hat * (1.0 - p_hat) / n));
}

TEST_CASE("linear extinction CDF: monotone, bounded, continuous at equal rates") {
    const ModelParams p(1, 0.8, 1.0);
    for (int x : {1, 10, 100}) {
        double prev = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double f = linear_extinction_cdf(p, x, 0.25 * i);
            CHECK(f >= prev);
            CHECK(f <= 1.0);
            prev = f;
        }
    }
    for (double t : {0.5, 3.0, 50.0}) {
        for (int x = 1; x < 60; ++x) CHECK(linear_extinction_cdf(p, x + 1, t) <= linear_extinction_cdf(p, x, t));
    }
    for (double lam : {1.0, 0.3}) {
        const ModelParams equal(1, lam, lam);
        for (double t : {0.1, 1.0, 10.0, 200.0}) {
            for (int x : {1, 7, 100, 5000}) {
                const double limit = linear_extinction_cdf(equal, x, t);
                CHECK(limit == doctest::Approx(std::pow(lam * t / (1.0 + lam * t), x)).epsilon(1e-12));
                for (double eps : {1e-8, -1e-8}) {
                    const double near = linear_extinction_cdf(ModelParams(1, lam, lam + eps), x, t);
                    CHECK(std::abs(near - limit) < 1e-6);
                }
            }
        }
    }
    // supercritical: tends to (mu/lambda)^x
    CHECK(linear_extinction_cdf(ModelParams(1, 2.0, 1.0), 3, 1e4) == doctest::Approx(0.125).epsilon(1e-12));
    for (double t : {0.1, 1.0, 5.0}) {
        const double e = std::exp(t);  // d = -1
        CHECK(linear_extinction_cdf(ModelParams(1, 2.0, 1.0), 1, t) ==
              doctest::Approx(1.0 + e / (1.0 - 2.0 * e)).epsilon(1e-12));
    }
}

TEST_CASE("linear extinction CDF at t_w approaches the Gumbel law") {
    const ModelParams p(1, 0.5, 1.0);
    constexpr int x_star = 10'000;
    for (double w : {-1.0, 0.0, 1.0, 2.0}) {
        const double t_w = (std::log(x_star) + std::log(p.gap()) - std::log(p.mu()) + w) / p.gap();
        CHECK(std::abs(linear_extinction_cdf(p, x_star, t_w) - gumbel_cdf(w)) < 0.01);
    }
}

TEST_CASE("ruin probability") {
    const ModelParams p(1, 1.0, 2.0);
    CHECK(ruin_escape_probability(p, 3, 3).probability == 1.0);
    CHECK(ruin_escape_probability(p, 0, 3).probability == 0.0);
    CHECK(ruin_escape_probability(p, 1, 3).probability == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
    CHECK(oracles::ruin_probability_linear_system(1.0, 2.0, 1, 3) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
    CHECK_THROWS_AS(ruin_escape_probability(ModelParams(1, 1.0, 1.0), 1, 3), std::domain_error);
    CHECK_THROWS_AS(ruin_escape_probability(ModelParams(1, 2.0, 1.0), 1, 3), std::domain_error);
    CHECK_THROWS_AS(ruin_escape_probability(p, 4, 3), std::domain_error);

    SUBCASE("exhaustive small cases against a linear solve") {
        for (auto [lam, mu] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {0.5, 1.0}, {0.9, 1.0}, {0.01, 3.0}}) {
            const ModelParams q(1, lam, mu);
            for (int y = 1; y <= 12; ++y) {
                for (int x = 0; x <= y; ++x) {
                    const auto r = ruin_escape_probability(q, x, y);
                    CHECK(std::abs(r.probability - oracles::ruin_probability_linear_system(lam, mu, x, y)) < 1e-12);
                    CHECK(r.probability <= r.geometric_bound * (1.0 + 1e-12));
                    CHECK(r.geometric_bound <= r.exponential_bound * (1.0 + 1e-12));
                }
            }
        }
    }
    SUBCASE("large exponents stay finite") {
        const auto r = ruin_escape_probability(ModelParams(1, 0.5, 1.0), 999'990, 1'000'000);
        CHECK(r.probability == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-9));
        CHECK(ruin_escape_probability(ModelParams(1, 0.5, 1.0), 1, 1'000'000).probability >= 0.0);
    }
}

TEST_CASE("Gumbel law") {
    CHECK(gumbel_cdf(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(gumbel_cdf(50.0) == doctest::Approx(1.0));
    CHECK(gumbel_cdf(-10.0) < 1e-9);
    for (double u : {1e-6, 0.1, 0.5, 0.9, 1 - 1e-9}) CHECK(gumbel_cdf(gumbel_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
    // mean of the density by trapezoid quadrature
    double mean = 0.0;
    const double h = 1e-3;
    for (double w = -8.0; w < 60.0; w += h) {
        const double dens = std::exp(-w - std::exp(-w));
        mean += w * dens * h;
    }
    CHECK(mean == doctest::Approx(euler_gamma).epsilon(1e-6));
    CHECK(euler_gamma == doctest::Approx(0.5772).epsilon(1e-4));
}

TEST_CASE("Gumbel predictions") {
    const ModelParams p(1'000'000, 0.5, 1.0);
    const auto g = predict_extinction(p, InitialCondition(p, 1'000'000));
    CHECK(g.formula == CenteringFormula::General);
    CHECK(g.centering == doctest::Approx(12.429216).epsilon(1e-7));
    CHECK(g.predicted_mean == doctest::Approx(26.012864).epsilon(1e-7));
    CHECK(g.scale == 2.0);
    CHECK(g.predicted_mean == g.scale * (g.centering + euler_gamma));
    CHECK(g.diagnostics.gap_sqrt_n == doctest::Approx(500.0));
    CHECK(g.diagnostics.x0_gap == doctest::Approx(500'000.0));
    CHECK(g.normalize(g.predicted_mean) == doctest::Approx(euler_gamma));

    SUBCASE("intermediate form equals the general one") {
        for (std::int64_t x0 : {1, 100, 5'000, 1'000'000}) {
            const InitialCondition ic(p, x0);
            CHECK(predict_extinction(p, ic, CenteringFormula::Intermediate).centering ==
                  doctest::Approx(predict_extinction(p, ic).centering).epsilon(1e-13));
        }
    }
    SUBCASE("low start") {
        const InitialCondition ic(p, 1'000);
        const double diff = predict_extinction(p, ic, CenteringFormula::Low).centering - predict_extinction(p, ic).centering;
        CHECK(diff == doctest::Approx(std::log1p(0.5 * 1000 / (0.5 * 1e6))).epsilon(1e-9));
        CHECK(std::abs(diff) < 0.01);
    }
    SUBCASE("high start") {
        const ModelParams q(1'000'000, 0.999, 1.0);
        const InitialCondition ic(q, 1'000'000);
        const double diff = predict_extinction(q, ic).centering - predict_extinction(q, ic, CenteringFormula::High).centering;
        CHECK(std::abs(diff) < 0.01);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(predict_extinction(ModelParams(10, 1.0, 1.0), InitialCondition(ModelParams(10, 1.0, 1.0), 5)),
                        std::domain_error);
        CHECK_THROWS_AS(predict_extinction(p, InitialCondition(p, 0)), std::domain_error);
        const ModelParams death(10, 0.0, 1.0);
        CHECK_THROWS_AS(predict_extinction(death, InitialCondition(death, 5), CenteringFormula::High), std::domain_error);
    }
    CHECK(centering_formula_from_string("high") == CenteringFormula::High);
    CHECK_THROWS(centering_formula_from_string("medium"));
}

TEST_CASE("exact mean extinction time") {
    CHECK(exact_mean_extinction(ModelParams(10, 0.5, 1.0), 0) == 0.0);
    for (auto [lam, mu] : std::vector<std::pair<double, double>>{{0.5, 1.0}, {3.0, 2.0}, {0.0, 0.7}}) {
        CHECK(exact_mean_extinction(ModelParams(1, lam, mu), 1) == doctest::Approx(1.0 / mu).epsilon(1e-15));
    }
    const ModelParams death(100, 0.0, 2.0);
    double harmonic = 0.0;
    for (int j = 1; j <= 37; ++j) harmonic += 1.0 / j;
    CHECK(exact_mean_extinction(death, 37) == doctest::Approx(harmonic / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(exact_mean_extinction(death, 101), std::domain_error);
    CHECK_THROWS_AS(exact_mean_extinction(death, -1), std::domain_error);

    SUBCASE("dense solve and double sum agree with the recursion") {
        for (auto [N, lam, mu] : std::vector<std::tuple<std::int64_t, double, double>>{
                 {30, 0.5, 1.0}, {50, 2.0, 1.0}, {80, 1.0, 1.0}, {200, 0.9, 1.0}}) {
            const ModelParams q(N, lam, mu);
            const auto dense = dense_mean(N, lam, mu);
            const auto all = exact_mean_extinction_all(q);
            REQUIRE(all.size() == static_cast<std::size_t>(N + 1));
            for (std::int64_t x = 1; x <= N; ++x) {
                CHECK(all[x] == doctest::Approx(dense(x - 1)).epsilon(1e-9));
                CHECK(exact_mean_extinction(q, x) == doctest::Approx(all[x]).epsilon(1e-13));
            }
            for (std::int64_t x : {std::int64_t{1}, N / 2, N}) {
                CHECK(exact_mean_extinction_double_sum(q, x) == doctest::Approx(all[x]).epsilon(1e-10));
            }
        }
        CHECK_THROWS_AS(exact_mean_extinction_double_sum(ModelParams(501, 0.5, 1.0), 3), CostGuardExceeded);
    }
    SUBCASE("monotone in x0") {
        const auto all = exact_mean_extinction_all(ModelParams(2'000, 0.8, 1.0));
        for (std::size_t x = 1; x < all.size(); ++x) CHECK(all[x] > all[x - 1]);
    }
    SUBCASE("time rescaling") {
        const ModelParams q(5'000, 0.7, 1.0);
        for (double c : {0.5, 2.0}) {
            for (std::int64_t x0 : {1, 70, 5'000}) {
                CHECK(exact_mean_extinction(q.rescaled(c), x0) ==
                      doctest::Approx(exact_mean_extinction(q, x0) / c).epsilon(1e-10));
            }
        }
    }
    SUBCASE("no overflow in the supercritical regime") {
        const ModelParams q(2'000, 2.0, 1.0);
        const double log_mean = exact_log_mean_extinction(q, 2'000);
        CHECK(std::isfinite(log_mean));
        CHECK(log_mean > 100.0);
        const ModelParams small(60, 2.0, 1.0);
        CHECK(std::log(exact_mean_extinction(small, 60)) == doctest::Approx(exact_log_mean_extinction(small, 60)).epsilon(1e-12));
    }
    SUBCASE("log N growth stabilizes") {
        std::vector<double> v;
        for (std::int64_t N = 1'000; N <= 1'000'000; N *= 10) {
            v.push_back(0.5 * exact_mean_extinction(ModelParams(N, 0.5, 1.0), N) - std::log(static_cast<double>(N)));
        }
        for (std::size_t i = 2; i < v.size(); ++i) CHECK(std::abs(v[i] - v[i - 1]) < std::abs(v[i - 1] - v[i - 2]));
    }
}

TEST_CASE("forward-equation extinction CDF") {
    const auto grid = TimeGrid::uniform(10.0, 50);
    SUBCASE("absorbed start") {
        const auto r = exact_extinction_cdf_logistic(ModelParams(20, 0.5, 1.0), 0, grid);
        for (double c : r.cdf) CHECK(c == 1.0);
    }
    SUBCASE("two-state chain") {
        const auto r = exact_extinction_cdf_logistic(ModelParams(1, 0.5, 1.3), 1, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(r.cdf[i] == doctest::Approx(1.0 - std::exp(-1.3 * grid[i])).epsilon(1e-9));
        }
    }
    SUBCASE("monotone and bounded, zero at t = 0") {
        const auto r = exact_extinction_cdf_logistic(ModelParams(100, 1.5, 1.0), 20, grid);
        CHECK(r.cdf[0] == 0.0);
        for (std::size_t i = 1; i < r.cdf.size(); ++i) {
            CHECK(r.cdf[i] >= r.cdf[i - 1]);
            CHECK(r.cdf[i] <= 1.0);
        }
        CHECK(r.error_estimate < 1e-6);
    }
    SUBCASE("quadrature of the survival function gives the exact mean") {
        const ModelParams p(200, 0.7, 1.0);
        const auto fine = TimeGrid::uniform(200.0, 4'000);
        const auto r = exact_extinction_cdf_logistic(p, 200, fine);
        const double quad = oracles::mean_from_cdf(r.cdf, 0.05);
        CHECK(quad == doctest::Approx(exact_mean_extinction(p, 200)).epsilon(1e-3));
    }
    SUBCASE("cost guard") {
        CHECK_THROWS_AS(exact_extinction_cdf_logistic(ModelParams(20'001, 0.5, 1.0), 1, grid), CostGuardExceeded);
        ForwardCdfOptions small;
        small.max_n = 10;
        CHECK_THROWS_AS(exact_extinction_cdf_logistic(ModelParams(11, 0.5, 1.0), 1, grid, small), CostGuardExceeded);
    }
}

TEST_CASE("time grid") {
    CHECK_THROWS_AS(TimeGrid({1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(TimeGrid({-1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(TimeGrid({0.0, INFINITY}), std::domain_error);
    const auto g = TimeGrid::uniform(2.0, 4);
    CHECK(g.size() == 5);
    CHECK(g[4] == 2.0);
}

TEST_CASE("small-start limits") {
    const ModelParams p(1'000'000, 1.0, 1.0 + 1e-4);
    auto s = small_start_limits(p, 100, SmallStartMode::VanishingProduct, 1.0);
    CHECK(s.limit == doctest::Approx(std::exp(-1.0)));
    CHECK(std::abs(s.finite_size - s.limit) < 0.02);
    CHECK(s.time == doctest::Approx(100.0 / p.mu()));
    s = small_start_limits(p, 1, SmallStartMode::SingleInfective, 1.0);
    CHECK(s.limit == 0.5);
    CHECK(std::abs(s.finite_size - 0.5) < 0.02);
    CHECK_THROWS_AS(small_start_limits(p, 100, SmallStartMode::VanishingProduct, 0.0), std::domain_error);
    CHECK_THROWS_AS(small_start_limits(p, 2, SmallStartMode::SingleInfective, 1.0), std::domain_error);
    // the finite-size value approaches the limit as x* grows
    const double e100 = std::abs(small_start_limits(p, 100, SmallStartMode::VanishingProduct, 2.0).finite_size - std::exp(-0.5));
    const double e10 = std::abs(small_start_limits(p, 10, SmallStartMode::VanishingProduct, 2.0).finite_size - std::exp(-0.5));
    CHECK(e100 < e10);
}

TEST_CASE("concentration bound") {
    CHECK(concentration_bound({2.0, 600.0, 0.0}) == 1.0);
    CHECK(concentration_bound({2.0, 600.0, 1e6}) < 1e-100);
    CHECK(concentration_bound({2.0, 600.0, 100.0}) ==
          doctest::Approx(2.0 * std::exp(-1e4 / (1200.0 + 400.0 / 3.0))).epsilon(1e-14));
    CHECK_THROWS_AS(concentration_bound({-1.0, 1.0, 1.0}), std::domain_error);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double alpha = 5.0 * unit(gen), beta = 100.0 * unit(gen);
        double prev = 1.0;
        for (int i = 1; i <= 100; ++i) {
            const double b = concentration_bound({alpha, beta, 2.0 * i});
            CHECK(b <= prev);
            CHECK(b >= 0.0);
            prev = b;
        }
    }
}

TEST_CASE("step-size bound for the contraction argument") {
    const ModelParams p(1'000, 0.5, 1.0);
    const auto b = intermediate_phase_beta_bound(p, 100, 2.0);
    CHECK(b.alpha == 2.0);
    CHECK(b.beta == doctest::Approx(600.0));
    CHECK(intermediate_phase_beta_bound(p, 200, 2.0).beta == doctest::Approx(2.0 * b.beta));
    CHECK_THROWS_AS(intermediate_phase_beta_bound(ModelParams(10, 1.0, 1.0), 1, 2.0), std::domain_error);
    CHECK_THROWS_AS(intermediate_phase_beta_bound(p, 1, 1.5), std::domain_error);
    CHECK_THROWS_AS(intermediate_phase_beta_bound(p, 0, 2.0), std::domain_error);
}

TEST_CASE("phase schedule") {
    const ModelParams p(1'000'000, 0.5, 1.0);
    const auto omega = ScalingFunction::standard();
    const auto full = phase_schedule(p, InitialCondition(p, 1'000'000), omega, 2.0, 0.0);
    const double w_n = std::pow(0.5, 0.25) * std::pow(1e6, 0.125);
    CHECK(full.omega == doctest::Approx(w_n));
    CHECK(full.x_star == static_cast<std::int64_t>(std::ceil(1000.0 * w_n)));
    CHECK(full.k_star == static_cast<std::int64_t>(std::ceil(2.0 * 1.5 * 1e6 * full.t_star)));

    SUBCASE("x0 = x_star gives no intermediate phase") {
        const auto s = phase_schedule(p, InitialCondition(p, full.x_star), omega, 2.0, 0.0);
        CHECK(s.t_star == 0.0);
        CHECK(s.k_star == 0);
    }
    SUBCASE("exact and approximate durations differ by the x_star correction") {
        const double correction = std::log1p(0.5 * static_cast<double>(full.x_star) / (0.5 * 1e6)) / 0.5;
        CHECK(std::abs((full.t_star - full.t_star_approx) - correction) < 1e-12);
    }
    SUBCASE("phases recompose the Gumbel centering") {
        for (double w : {-1.0, 0.0, 2.0}) {
            const auto s = phase_schedule(p, InitialCondition(p, 1'000'000), omega, 2.0, w);
            const auto g = predict_extinction(p, InitialCondition(p, 1'000'000));
            CHECK(std::abs(s.t_star + s.t_w - (g.centering + w) / p.gap()) < 0.02);
        }
    }
    SUBCASE("initial phase only for very large starts") {
        CHECK(full.t0 == 0.0);
        const auto s = phase_schedule(p, InitialCondition(p, 1'000'000), ScalingFunction::constant(0.1), 2.0, 0.0);
        CHECK(s.t0 == doctest::Approx(1.0 / (std::sqrt(0.1) * 0.5 * 0.5)));
    }
    SUBCASE("x_star is clamped to N") {
        const ModelParams q(10, 0.5, 1.0);
        const auto s = phase_schedule(q, InitialCondition(q, 10), ScalingFunction::constant(100.0), 2.0, 0.0);
        CHECK(s.x_star == 10);
    }
    CHECK_THROWS_AS(phase_schedule(ModelParams(10, 1.0, 1.0), InitialCondition(ModelParams(10, 1.0, 1.0), 5),
                                   ScalingFunction::constant(1.0), 2.0, 0.0),
                    std::domain_error);
}
