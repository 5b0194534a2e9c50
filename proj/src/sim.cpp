#include "sisext/sim.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sisext {

namespace {

template <typename RateFn>
Trajectory run_birth_death(State x0, StreamEngine& rng, double t_max, State cap, bool record_path,
                           RateFn&& rates) {
    if (!(t_max > 0.0)) {
        throw std::domain_error("sampler: t_max must be positive (an explicit horizon is required)");
    }
    Trajectory traj;
    traj.initial_state = x0;
    State x = x0;
    double t = 0.0;
    while (x > 0) {
        if (x >= cap) {
            traj.cap_hit = true;
            break;
        }
        const Rates r = rates(x);
        const double total = r.total();
        const double wait = rng.exponential(total);
        if (t + wait > t_max) {
            traj.censored = true;
            t = t_max;
            break;
        }
        t += wait;
        x += rng.uniform() * total < r.up ? 1 : -1;
        ++traj.event_count;
        if (record_path) {
            traj.event_times.push_back(t);
            traj.states.push_back(x);
        }
    }
    if (x == 0) traj.extinction_time = t;
    traj.end_time = t;
    traj.final_state = x;
    return traj;
}

}  // namespace

Trajectory sample_extinction_logistic(const ModelParams& p, const InitialCondition& ic, RandomSource src,
                                      double t_max, bool record_path) {
    StreamEngine rng(src);
    const double n = static_cast<double>(p.N());
    const double lam = p.lambda();
    const double mu = p.mu();
    const State big_n = p.N();
    return run_birth_death(ic.x0(), rng, t_max, big_n + 1, record_path, [&](State x) {
        const auto xd = static_cast<double>(x);
        return Rates{lam * xd * (static_cast<double>(big_n - x) / n), mu * xd};
    });
}

State default_linear_cap(State x_start) { return 10 * std::max<State>(x_start, 1); }

Trajectory sample_extinction_linear(const ModelParams& p, State x_start, RandomSource src, double t_max,
                                    State y_cap, bool record_path) {
    if (x_start < 0) throw std::domain_error("sample_extinction_linear: negative start state");
    if (y_cap <= x_start) throw std::domain_error("sample_extinction_linear: y_cap must exceed x_start");
    StreamEngine rng(src);
    const double lam = p.lambda();
    const double mu = p.mu();
    return run_birth_death(x_start, rng, t_max, y_cap, record_path, [&](State y) {
        const auto yd = static_cast<double>(y);
        return Rates{lam * yd, mu * yd};
    });
}

std::vector<State> sample_states_at(const ModelParams& p, const InitialCondition& ic, RandomSource src,
                                    const TimeGrid& grid) {
    StreamEngine rng(src);
    std::vector<State> out;
    out.reserve(grid.size());
    State x = ic.x0();
    double t = 0.0;
    std::size_t next = 0;
    const auto times = grid.times();
    while (next < times.size()) {
        if (x == 0) {
            out.push_back(0);
            ++next;
            continue;
        }
        const Rates r = rates_logistic(p, x);
        const double total = r.total();
        const double t_jump = t + rng.exponential(total);
        while (next < times.size() && times[next] < t_jump) {
            out.push_back(x);
            ++next;
        }
        if (next == times.size()) break;
        t = t_jump;
        x += rng.uniform() * total < r.up ? 1 : -1;
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "time,state\n";
    out << fmt::format("{},{}\n", 0.0, traj.initial_state);
    for (std::size_t i = 0; i < traj.event_times.size(); ++i) {
        out << fmt::format("{},{}\n", traj.event_times[i], traj.states[i]);
    }
}

DiscreteChainParams::DiscreteChainParams(double K) : K_(K) {
    if (!(K >= 2.0) || !std::isfinite(K)) {
        throw std::domain_error("DiscreteChainParams: K must be finite and at least 2, got " + std::to_string(K));
    }
}

double DiscreteChainParams::delta(const ModelParams& p) const noexcept {
    return 1.0 / (K_ * (p.mu() + p.lambda()) * static_cast<double>(p.N()));
}

StepProbabilities discrete_step_probabilities(const ModelParams& p, const DiscreteChainParams& d, State x) {
    const Rates r = rates_logistic(p, x);
    const double delta = d.delta(p);
    const double up = delta * r.up;
    const double down = delta * r.down;
    return {up, down, 1.0 - up - down};
}

State step_discrete(const ModelParams& p, const DiscreteChainParams& d, State x, StreamEngine& rng) {
    const StepProbabilities s = discrete_step_probabilities(p, d, x);
    const double u = rng.uniform();
    if (u < s.up) return x + 1;
    if (u < s.up + s.down) return x - 1;
    return x;
}

State run_discrete(const ModelParams& p, const DiscreteChainParams& d, State x, std::uint64_t steps,
                   StreamEngine& rng) {
    std::uint64_t k = 0;
    while (k < steps && x > 0) {
        const StepProbabilities s = discrete_step_probabilities(p, d, x);
        const std::uint64_t holds = rng.geometric(s.leave());
        if (holds >= steps - k) break;
        k += holds + 1;
        x += rng.uniform() * s.leave() < s.up ? 1 : -1;
    }
    return x;
}

}  // namespace sisext
