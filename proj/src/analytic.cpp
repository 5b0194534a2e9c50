#include "sisext/analytic.hpp"

#include "sisext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sisext {

namespace {

void require_subcritical(const ModelParams& p, const char* who) {
    if (!p.subcritical()) {
        throw std::domain_error(std::string(who) + ": requires mu > lambda");
    }
}

// log(1 + e^v) without overflow.
double softplus(double v) {
    return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

// log tau_x for x = 1..N, where tau_x is the expected time to step from x
// down to x - 1:  tau_x = (1 + up_x tau_{x+1}) / down_x,  tau_N = 1 / down_N.
std::vector<double> log_descent_times(const ModelParams& p) {
    const std::int64_t n = p.N();
    std::vector<double> log_tau(static_cast<std::size_t>(n) + 1, 0.0);
    double next = 0.0;
    for (std::int64_t x = n; x >= 1; --x) {
        const Rates r = rates_logistic(p, x);
        double lt = -std::log(r.down);
        if (x < n && r.up > 0.0) {
            lt += softplus(std::log(r.up) + next);
        }
        log_tau[static_cast<std::size_t>(x)] = lt;
        next = lt;
    }
    return log_tau;
}

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void require_state(const ModelParams& p, std::int64_t x0, const char* who) {
    if (x0 < 0 || x0 > p.N()) {
        throw std::domain_error(std::string(who) + ": x0 = " + std::to_string(x0) + " outside [0, N]");
    }
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) {
        throw std::domain_error("TimeGrid: at least one time is required");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || times_[i] < 0.0) {
            throw std::domain_error("TimeGrid: times must be finite and non-negative");
        }
        if (i > 0 && !(times_[i] > times_[i - 1])) {
            throw std::domain_error("TimeGrid: times must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(double t_end, std::size_t n) {
    if (n == 0 || !(t_end > 0.0)) {
        throw std::domain_error("TimeGrid::uniform: need n >= 1 and t_end > 0");
    }
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        t[i] = t_end * static_cast<double>(i) / static_cast<double>(n);
    }
    return TimeGrid(std::move(t));
}

double linear_extinction_cdf(const ModelParams& p, std::int64_t x_star, double t) {
    if (x_star < 0) throw std::domain_error("linear_extinction_cdf: negative x_star");
    if (!(t >= 0.0)) throw std::domain_error("linear_extinction_cdf: negative t");
    if (x_star == 0) return 1.0;
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return p.subcritical() ? 1.0 : std::pow(p.mu() / p.lambda(), static_cast<double>(x_star));

    const double lam = p.lambda();
    const double mu = p.mu();
    const double d = mu - lam;
    double r;  // per-individual survival probability P(Y_t > 0 | Y_0 = 1)
    if (lam == 0.0) {
        r = std::exp(-mu * t);
    } else if (std::abs(d) < 1e-9 * (mu + lam)) {
        r = 1.0 / (1.0 + lam * t);
    } else if (d > 0.0) {
        // mu - lambda e^{-dt} = d + lambda (1 - e^{-dt})
        r = d * std::exp(-d * t) / (d - lam * std::expm1(-d * t));
    } else {
        // same ratio scaled by e^{dt}, which stays bounded when d < 0
        r = d / (d * std::exp(d * t) + lam * std::expm1(d * t));
    }
    if (r >= 1.0) return 0.0;
    return std::exp(static_cast<double>(x_star) * std::log1p(-r));
}

RuinProbability ruin_escape_probability(const ModelParams& p, std::int64_t x_start, std::int64_t y_top) {
    require_subcritical(p, "ruin_escape_probability");
    if (y_top < 1 || x_start < 0 || x_start > y_top) {
        throw std::domain_error("ruin_escape_probability: need 0 <= x_start <= y_top and y_top >= 1");
    }
    const double gap = static_cast<double>(y_top - x_start);
    const double exp_bound = std::exp(-p.gap() * gap / p.mu());
    if (p.lambda() == 0.0) {
        const double prob = x_start == y_top ? 1.0 : 0.0;
        return {prob, prob, exp_bound};
    }
    const double log_ratio = std::log(p.mu() / p.lambda());
    const double geo_bound = std::exp(-log_ratio * gap);
    double prob;
    if (x_start == 0) {
        prob = 0.0;
    } else if (x_start == y_top) {
        prob = 1.0;
    } else {
        // ((mu/lambda)^x - 1) / ((mu/lambda)^y - 1), rearranged so nothing overflows
        const double lx = log_ratio * static_cast<double>(x_start);
        const double ly = log_ratio * static_cast<double>(y_top);
        prob = std::exp(lx - ly) * std::expm1(-lx) / std::expm1(-ly);
    }
    return {prob, geo_bound, exp_bound};
}

double gumbel_cdf(double w) { return std::exp(-std::exp(-w)); }

double gumbel_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("gumbel_quantile: u must lie in (0, 1)");
    }
    return -std::log(-std::log(u));
}

std::string_view to_string(CenteringFormula f) {
    switch (f) {
        case CenteringFormula::General: return "general";
        case CenteringFormula::Intermediate: return "intermediate";
        case CenteringFormula::Low: return "low";
        case CenteringFormula::High: return "high";
    }
    return "unknown";
}

CenteringFormula centering_formula_from_string(std::string_view name) {
    if (name == "general") return CenteringFormula::General;
    if (name == "intermediate") return CenteringFormula::Intermediate;
    if (name == "low") return CenteringFormula::Low;
    if (name == "high") return CenteringFormula::High;
    throw std::invalid_argument("unknown centering formula '" + std::string(name) + "'");
}

double GumbelPrediction::cdf(double t) const { return gumbel_cdf(normalize(t)); }

double GumbelPrediction::normalize(double t) const { return t / scale - centering; }

GumbelPrediction predict_extinction(const ModelParams& p, const InitialCondition& ic, CenteringFormula formula) {
    require_subcritical(p, "predict_extinction");
    if (ic.x0() < 1) {
        throw std::domain_error("predict_extinction: x0 must be at least 1");
    }
    const double d = p.gap();
    const double lam = p.lambda();
    const double mu = p.mu();
    const auto n = static_cast<double>(p.N());
    const auto x0 = static_cast<double>(ic.x0());

    double c = 0.0;
    switch (formula) {
        case CenteringFormula::General:
            c = std::log(x0) + std::log(d) - std::log1p(lam * x0 / (d * n)) - std::log(mu);
            break;
        case CenteringFormula::Intermediate: {
            const double z0 = ic.z0();
            c = std::log(n) + std::log(z0) + 2.0 * std::log(d) - std::log(d + lam * z0) - std::log(mu);
            break;
        }
        case CenteringFormula::Low:
            c = std::log(x0) + std::log(d) - std::log(mu);
            break;
        case CenteringFormula::High:
            if (lam == 0.0) {
                throw std::domain_error("predict_extinction: the high-start formula needs lambda > 0");
            }
            c = std::log(n) + 2.0 * std::log(d) - std::log(mu) - std::log(lam);
            break;
    }
    const double scale = 1.0 / d;
    return {c, scale, scale * (c + euler_gamma), formula, {d * std::sqrt(n), x0 * d, x0 / (d * n)}};
}

std::vector<double> exact_mean_extinction_all(const ModelParams& p) {
    const auto log_tau = log_descent_times(p);
    const double top = *std::max_element(log_tau.begin() + 1, log_tau.end());
    std::vector<double> out(log_tau.size(), 0.0);
    CompensatedSum acc;
    const double scale = std::exp(top);
    for (std::size_t x = 1; x < log_tau.size(); ++x) {
        acc.add(std::exp(log_tau[x] - top));
        out[x] = scale * acc.value();
    }
    return out;
}

double exact_log_mean_extinction(const ModelParams& p, std::int64_t x0) {
    require_state(p, x0, "exact_log_mean_extinction");
    if (x0 == 0) return -std::numeric_limits<double>::infinity();
    const auto log_tau = log_descent_times(p);
    const auto last = log_tau.begin() + x0 + 1;
    const double top = *std::max_element(log_tau.begin() + 1, last);
    CompensatedSum acc;
    for (auto it = log_tau.begin() + 1; it != last; ++it) acc.add(std::exp(*it - top));
    return top + std::log(acc.value());
}

double exact_mean_extinction(const ModelParams& p, std::int64_t x0) {
    require_state(p, x0, "exact_mean_extinction");
    if (x0 == 0) return 0.0;
    return std::exp(exact_log_mean_extinction(p, x0));
}

double exact_mean_extinction_double_sum(const ModelParams& p, std::int64_t x0) {
    require_state(p, x0, "exact_mean_extinction_double_sum");
    if (p.N() > double_sum_max_n) {
        throw CostGuardExceeded("exact_mean_extinction_double_sum: N above " + std::to_string(double_sum_max_n));
    }
    // E = sum_{x=1}^{x0} sum_{j=x}^{N} (1/down_j) prod_{i=x}^{j-1} up_i / down_i
    double total = 0.0;
    for (std::int64_t x = 1; x <= x0; ++x) {
        double prod = 1.0;
        double inner = 0.0;
        for (std::int64_t j = x; j <= p.N(); ++j) {
            const Rates rj = rates_logistic(p, j);
            inner += prod / rj.down;
            prod *= rj.up / rj.down;
        }
        total += inner;
    }
    return total;
}

ForwardCdfResult exact_extinction_cdf_logistic(const ModelParams& p, std::int64_t x0, const TimeGrid& grid,
                                               const ForwardCdfOptions& opts) {
    require_state(p, x0, "exact_extinction_cdf_logistic");
    if (p.N() > opts.max_n) {
        throw CostGuardExceeded("exact_extinction_cdf_logistic: N = " + std::to_string(p.N()) +
                                " exceeds the cost guard " + std::to_string(opts.max_n) +
                                "; estimate the law by Monte Carlo instead");
    }
    const std::size_t n = static_cast<std::size_t>(p.N()) + 1;
    std::vector<double> up(n), down(n);
    double max_rate = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        const Rates r = rates_logistic(p, static_cast<State>(x));
        up[x] = r.up;
        down[x] = r.down;
        max_rate = std::max(max_rate, r.total());
    }

    ForwardCdfResult result{{}, 0.0, 0, 0};
    result.cdf.reserve(grid.size());

    std::vector<double> y(n, 0.0);
    y[static_cast<std::size_t>(x0)] = 1.0;

    auto rhs = [&](const std::vector<double>& v, std::vector<double>& dv) {
        for (std::size_t x = 0; x < n; ++x) {
            double inflow = 0.0;
            if (x > 0) inflow += v[x - 1] * up[x - 1];
            if (x + 1 < n) inflow += v[x + 1] * down[x + 1];
            dv[x] = inflow - v[x] * (up[x] + down[x]);
        }
    };

    // Dormand-Prince 5(4) tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
    const double h_max = max_rate > 0.0 ? 0.5 / max_rate : std::numeric_limits<double>::infinity();
    double h = std::isfinite(h_max) ? h_max : 1.0;
    double t = 0.0;
    rhs(y, k1);

    for (const double target : grid.times()) {
        while (t < target && max_rate > 0.0) {
            const double remaining = target - t;
            const double step = std::min({h, remaining, h_max});

            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * a21 * k1[i];
            rhs(tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
            rhs(tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(ynew, k7);

            double err_norm = 0.0;
            double err_abs = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e =
                    step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err_norm = std::max(err_norm, std::abs(e) / sc);
                err_abs = std::max(err_abs, std::abs(e));
            }

            const double factor =
                err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (err_norm <= 1.0) {
                t = step == remaining ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);  // first-same-as-last
                result.error_estimate += err_abs;
                ++result.steps;
                h = std::min(step * factor, h_max);
            } else {
                ++result.rejected_steps;
                h = step * factor;
            }
        }
        result.cdf.push_back(std::clamp(y[0], 0.0, 1.0));
    }
    // Monotone by construction up to rounding; enforce it for downstream users.
    for (std::size_t i = 1; i < result.cdf.size(); ++i) {
        result.cdf[i] = std::max(result.cdf[i], result.cdf[i - 1]);
    }
    return result;
}

SmallStartLimit small_start_limits(const ModelParams& p, std::int64_t x_star, SmallStartMode mode, double arg) {
    if (!(arg > 0.0)) {
        throw std::domain_error("small_start_limits: argument must be positive");
    }
    if (mode == SmallStartMode::VanishingProduct) {
        if (x_star < 1) throw std::domain_error("small_start_limits: x_star must be at least 1");
        const double t = arg * static_cast<double>(x_star) / p.mu();
        return {std::exp(-1.0 / arg), linear_extinction_cdf(p, x_star, t), t};
    }
    if (x_star != 1) {
        throw std::domain_error("small_start_limits: single-infective mode needs x_star = 1");
    }
    const double t = arg / p.mu();
    return {arg / (1.0 + arg), linear_extinction_cdf(p, 1, t), t};
}

double concentration_bound(const ConcentrationInputs& c) {
    if (!(c.alpha >= 0.0) || !(c.beta >= 0.0) || !(c.a >= 0.0)) {
        throw std::domain_error("concentration_bound: inputs must be non-negative");
    }
    if (c.a == 0.0) return 1.0;
    const double denom = 2.0 * c.beta + 2.0 * c.alpha * c.a / 3.0;
    if (!(denom > 0.0)) {
        throw std::domain_error("concentration_bound: beta + alpha a must be positive when a > 0");
    }
    return std::min(1.0, 2.0 * std::exp(-c.a * c.a / denom));
}

IntermediateBetaBound intermediate_phase_beta_bound(const ModelParams& p, std::int64_t x0, double K) {
    require_subcritical(p, "intermediate_phase_beta_bound");
    if (!(K >= 2.0)) throw std::domain_error("intermediate_phase_beta_bound: K must be at least 2");
    if (x0 < 1) throw std::domain_error("intermediate_phase_beta_bound: x0 must be at least 1");
    return {2.0, 2.0 * static_cast<double>(x0) * (p.lambda() + p.mu()) / p.gap()};
}

PhaseSchedule phase_schedule(const ModelParams& p, const InitialCondition& ic, const ScalingFunction& omega_fn,
                             double K, double w) {
    require_subcritical(p, "phase_schedule");
    if (ic.x0() < 1) throw std::domain_error("phase_schedule: x0 must be at least 1");
    if (!(K >= 2.0)) throw std::domain_error("phase_schedule: K must be at least 2");

    const double d = p.gap();
    const double lam = p.lambda();
    const double mu = p.mu();
    const auto n = static_cast<double>(p.N());
    const auto x0 = static_cast<double>(ic.x0());
    const double omega = omega_fn(p);

    PhaseSchedule s{};
    s.omega = omega;
    const double raw_star = std::ceil(std::sqrt(n) * omega);
    s.x_star = static_cast<std::int64_t>(std::clamp(raw_star, 1.0, n));
    const auto xs = static_cast<double>(s.x_star);

    if (ic.x0() >= s.x_star) {
        s.t_star = (ode_s(p, xs / n) - ode_s(p, x0 / n)) / d;
        s.t_star_approx = (std::log(x0) - std::log(xs) - std::log1p(lam * x0 / (d * n))) / d;
    }
    if (x0 > d * n * omega) {
        if (lam == 0.0) {
            throw std::domain_error("phase_schedule: the initial-phase time needs lambda > 0");
        }
        s.t0 = 1.0 / (std::sqrt(omega) * lam * d);
    }
    s.k_star = static_cast<std::int64_t>(std::ceil(K * (mu + lam) * n * s.t_star));
    s.t_w = (std::log(xs) + std::log(d) - std::log(mu) + w) / d;
    return s;
}

}  // namespace sisext
