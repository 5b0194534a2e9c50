#include "sisext/oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace sisext::oracles {

double ruin_probability_linear_system(double lambda, double mu, std::int64_t x, std::int64_t y) {
    if (y < 1 || x < 0 || x > y) throw std::domain_error("ruin oracle: need 0 <= x <= y, y >= 1");
    const double up = lambda / (lambda + mu);
    const double down = 1.0 - up;
    const auto n = static_cast<Eigen::Index>(y + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    a(0, 0) = 1.0;
    a(n - 1, n - 1) = 1.0;
    b(n - 1) = 1.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        a(i, i) = 1.0;
        a(i, i + 1) = -up;
        a(i, i - 1) = -down;
    }
    const Eigen::VectorXd h = a.fullPivLu().solve(b);
    return h(static_cast<Eigen::Index>(x));
}

std::vector<double> contraction_expected_distance(std::int64_t N, double lambda, double mu, double K,
                                                  std::int64_t x0, std::int64_t y0, std::uint64_t steps) {
    if (N < 1 || x0 < 0 || y0 < 0 || x0 > N || y0 > N) throw std::domain_error("contraction oracle: bad states");
    const auto n = static_cast<std::size_t>(N) + 1;
    const double scale = 1.0 / (K * (mu + lambda) * static_cast<double>(N));
    std::vector<double> p_up(n), p_down(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto sd = static_cast<double>(s);
        p_up[s] = scale * lambda * sd * (1.0 - sd / static_cast<double>(N));
        p_down[s] = scale * mu * sd;
    }
    auto idx = [n](std::size_t a, std::size_t b) { return a * n + b; };
    std::vector<double> law(n * n, 0.0), next(n * n, 0.0);
    law[idx(static_cast<std::size_t>(x0), static_cast<std::size_t>(y0))] = 1.0;

    std::vector<double> out;
    out.reserve(steps + 1);
    auto expected_distance = [&] {
        double e = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                e += law[idx(a, b)] * std::abs(static_cast<double>(a) - static_cast<double>(b));
        return e;
    };
    out.push_back(expected_distance());
    for (std::uint64_t k = 0; k < steps; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                const double w = law[idx(a, b)];
                if (w == 0.0) continue;
                if (a == b) {
                    if (a + 1 < n) next[idx(a + 1, b + 1)] += w * p_up[a];
                    if (a > 0) next[idx(a - 1, b - 1)] += w * p_down[a];
                    next[idx(a, b)] += w * (1.0 - p_up[a] - p_down[a]);
                } else {
                    if (a + 1 < n) next[idx(a + 1, b)] += w * p_up[a];
                    if (a > 0) next[idx(a - 1, b)] += w * p_down[a];
                    if (b + 1 < n) next[idx(a, b + 1)] += w * p_up[b];
                    if (b > 0) next[idx(a, b - 1)] += w * p_down[b];
                    next[idx(a, b)] += w * (1.0 - p_up[a] - p_down[a] - p_up[b] - p_down[b]);
                }
            }
        }
        law.swap(next);
        out.push_back(expected_distance());
    }
    return out;
}

double mean_from_cdf(std::span<const double> cdf, double dt) {
    const std::size_t intervals = cdf.size() - 1;
    if (cdf.size() < 3 || intervals % 2 != 0) {
        throw std::domain_error("mean_from_cdf: need an even number of intervals");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double surv = 1.0 - cdf[i];
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * surv;
    }
    double integral = acc * dt / 3.0;
    const double s1 = 1.0 - cdf[intervals - 1];
    const double s2 = 1.0 - cdf[intervals];
    if (s2 > 0.0 && s1 > s2) {
        const double rate = std::log(s1 / s2) / dt;
        integral += s2 / rate;
    }
    return integral;
}

}  // namespace sisext::oracles
