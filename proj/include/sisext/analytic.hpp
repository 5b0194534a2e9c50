#pragma once

// Closed-form and exact-numeric results for the extinction time of the
// logistic SIS chain and its linear birth-death comparison chain.

#include "sisext/model.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sisext {

inline constexpr double euler_gamma = 0.5772156649015329;

/// Strictly increasing, finite, non-negative evaluation times.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);

    /// n + 1 equally spaced points on [0, t_end].
    static TimeGrid uniform(double t_end, std::size_t n);

    std::span<const double> times() const noexcept { return times_; }
    std::size_t size() const noexcept { return times_.size(); }
    double operator[](std::size_t i) const { return times_[i]; }

private:
    std::vector<double> times_;
};

/// P(T_e <= t) for the linear chain (lambda y, mu y) started at x_star.
/// Falls back to the equal-rates law (lambda t / (1 + lambda t))^x_star when
/// |mu - lambda| < 1e-9 (mu + lambda).
double linear_extinction_cdf(const ModelParams& p, std::int64_t x_star, double t);

struct RuinProbability {
    double probability;        // P(reach y_top before 0)
    double geometric_bound;    // (lambda/mu)^(y_top - x_start)
    double exponential_bound;  // exp(-(mu - lambda)(y_top - x_start)/mu)
};

/// Gambler's-ruin escape probability of a chain whose up-step probability is
/// lambda / (lambda + mu) < 1/2, with the two cruder upper bounds.
RuinProbability ruin_escape_probability(const ModelParams& p, std::int64_t x_start, std::int64_t y_top);

/// Standard Gumbel CDF exp(-exp(-w)).
double gumbel_cdf(double w);

/// Standard Gumbel quantile, inverse of gumbel_cdf on (0, 1).
double gumbel_quantile(double u);

enum class CenteringFormula { General, Intermediate, Low, High };

std::string_view to_string(CenteringFormula f);
CenteringFormula centering_formula_from_string(std::string_view name);

struct HypothesisDiagnostics {
    double gap_sqrt_n;    // (mu - lambda) sqrt(N), must be large
    double x0_gap;        // x0 (mu - lambda), must be large
    double x0_over_gap_n; // x0 / ((mu - lambda) N): << 1 for Low, >> 1 for High
};

/// Gumbel limit for (mu - lambda) T_e: T_e ~ (centering + W) / (mu - lambda).
struct GumbelPrediction {
    double centering;
    double scale;           // 1 / (mu - lambda)
    double predicted_mean;  // scale * (centering + gamma)
    CenteringFormula formula;
    HypothesisDiagnostics diagnostics;

    /// Approximate P(T_e <= t) implied by the limit law.
    double cdf(double t) const;
    /// (mu - lambda) t - centering.
    double normalize(double t) const;
};

/// Centering constant of the requested formula; General is valid whenever
/// (mu - lambda) sqrt(N) and x0 (mu - lambda) are large.
GumbelPrediction predict_extinction(const ModelParams& p, const InitialCondition& ic,
                                    CenteringFormula formula = CenteringFormula::General);

/// E[T_e] for the logistic chain from x0, via the backward recursion for the
/// expected one-level descent times (log-space, O(N)).
double exact_mean_extinction(const ModelParams& p, std::int64_t x0);

/// log E[T_e]; finite even when E[T_e] overflows a double (supercritical).
double exact_log_mean_extinction(const ModelParams& p, std::int64_t x0);

/// E[T_e] for every x0 in [0, N] in one pass.
std::vector<double> exact_mean_extinction_all(const ModelParams& p);

/// Literal double-summation form of E[T_e]; O(N^2), cross-check only.
double exact_mean_extinction_double_sum(const ModelParams& p, std::int64_t x0);

inline constexpr std::int64_t double_sum_max_n = 500;

struct ForwardCdfOptions {
    std::int64_t max_n = 20000;
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
};

struct ForwardCdfResult {
    std::vector<double> cdf;    // P(X_t = 0) at each grid time
    double error_estimate;      // accumulated local error estimate (max norm)
    std::uint64_t steps;
    std::uint64_t rejected_steps;
};

/// P(T_e <= t) = P(X_t = 0) by integrating the forward equations on {0..N}
/// with an adaptive Dormand-Prince 5(4) pair, step capped at 0.5 / max rate.
ForwardCdfResult exact_extinction_cdf_logistic(const ModelParams& p, std::int64_t x0, const TimeGrid& grid,
                                               const ForwardCdfOptions& opts = {});

enum class SmallStartMode { VanishingProduct, SingleInfective };

struct SmallStartLimit {
    double limit;        // e^{-1/v} or u / (1 + u)
    double finite_size;  // linear_extinction_cdf at t = v x*/mu or u/mu
    double time;         // evaluation time
};

SmallStartLimit small_start_limits(const ModelParams& p, std::int64_t x_star, SmallStartMode mode, double arg);

struct ConcentrationInputs {
    double alpha;
    double beta;
    double a;
};

/// min(1, 2 exp(-a^2 / (2 beta + 2 alpha a / 3))).
double concentration_bound(const ConcentrationInputs& c);

struct IntermediateBetaBound {
    double alpha;  // 2
    double beta;   // 2 x0 (lambda + mu) / (mu - lambda), uniform in k
};

IntermediateBetaBound intermediate_phase_beta_bound(const ModelParams& p, std::int64_t x0, double K);

struct PhaseSchedule {
    double t0;              // initial-phase duration, 0 when x0 <= (mu - lambda) N omega
    double t_star;          // exact ODE time from x0 to x_star, 0 when x0 < x_star
    double t_star_approx;   // log form without the x_star correction
    std::int64_t x_star;    // ceil(sqrt(N) omega), clamped to [1, N]
    std::int64_t k_star;    // ceil(K (mu + lambda) N t_star)
    double t_w;             // final-phase w-quantile time from x_star
    double omega;
};

PhaseSchedule phase_schedule(const ModelParams& p, const InitialCondition& ic, const ScalingFunction& omega,
                             double K, double w);

}  // namespace sisext
