#pragma once

// Exact event-driven samplers for the logistic and linear chains and the
// discrete-time approximation chain with step probabilities scaled by
// 1 / (K (mu + lambda) N).

#include "sisext/analytic.hpp"
#include "sisext/model.hpp"
#include "sisext/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sisext {

struct Trajectory {
    State initial_state = 0;
    std::vector<double> event_times;  // filled only when the path is recorded
    std::vector<State> states;        // post-jump states, parallel to event_times
    std::optional<double> extinction_time;
    std::uint64_t event_count = 0;
    double end_time = 0.0;  // extinction time, censoring horizon, or cap-hit time
    State final_state = 0;
    bool censored = false;  // t_max reached before extinction
    bool cap_hit = false;   // linear chain reached its simulation cap
};

/// Exact simulation of the logistic chain until extinction or t_max.
/// Without record_path only O(1) memory is used.
Trajectory sample_extinction_logistic(const ModelParams& p, const InitialCondition& ic, RandomSource rng,
                                      double t_max, bool record_path = false);

/// Default simulation cap for the linear chain: 10 max(x_start, 1).
State default_linear_cap(State x_start);

/// Exact simulation of the linear chain (lambda y, mu y). Reaching y_cap
/// stops the run and sets cap_hit.
Trajectory sample_extinction_linear(const ModelParams& p, State x_start, RandomSource rng, double t_max,
                                    State y_cap, bool record_path = false);

/// States of one logistic path observed at each grid time.
std::vector<State> sample_states_at(const ModelParams& p, const InitialCondition& ic, RandomSource rng,
                                    const TimeGrid& grid);

/// CSV rows "time,state", starting with the initial state at time 0.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

class DiscreteChainParams {
public:
    explicit DiscreteChainParams(double K);

    double K() const noexcept { return K_; }
    /// Step length 1 / (K (mu + lambda) N) in continuous time.
    double delta(const ModelParams& p) const noexcept;

private:
    double K_;
};

struct StepProbabilities {
    double up;
    double down;
    double hold;

    double leave() const noexcept { return up + down; }
};

StepProbabilities discrete_step_probabilities(const ModelParams& p, const DiscreteChainParams& d, State x);

/// One step of the discrete chain.
State step_discrete(const ModelParams& p, const DiscreteChainParams& d, State x, StreamEngine& rng);

/// Runs the discrete chain for `steps` steps, skipping hold runs geometrically.
State run_discrete(const ModelParams& p, const DiscreteChainParams& d, State x, std::uint64_t steps,
                   StreamEngine& rng);

}  // namespace sisext
