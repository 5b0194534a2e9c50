#pragma once

// Couplings of birth-death chains: the linear/logistic/linear sandwich, the
// maximal one-step coupling of the observed continuous chain with the
// discrete approximation, and the non-crossing contraction coupling of two
// discrete chains.

#include "sisext/model.hpp"
#include "sisext/random.hpp"
#include "sisext/sim.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sisext {

enum class ChainKind { Logistic, Linear };

struct ChainSpec {
    ChainKind kind;
    ModelParams params;

    Rates rates(State x) const { return kind == ChainKind::Logistic ? rates_logistic(params, x) : rates_linear(params, x); }
};

enum class TauEvent { HitZero, HitUpperBoundary, Censored };

std::string_view to_string(TauEvent e);

struct CouplingTrace {
    std::size_t chain_count = 0;
    // Joint path, recorded on request: states are flattened chain_count per event.
    std::vector<double> times;
    std::vector<State> states;
    std::vector<State> final_states;

    bool ordering_violated = false;     // lower-indexed chain rose above a higher one
    bool split_jump_violation = false;  // chains in different states moved together
    TauEvent tau_event = TauEvent::Censored;
    double tau = 0.0;
    std::uint64_t event_count = 0;
    std::vector<std::optional<double>> extinction_times;

    bool lambda_clamped = false;  // sandwich only: lambda (1 - 2 x*/N) was negative

    // Discrete-step couplings: step at which the chains first disagreed, the
    // number of steps in [1, end] at which they disagreed, and whether they
    // disagree at the final step.
    std::optional<std::uint64_t> first_mismatch_step;
    std::uint64_t mismatch_count = 0;
    bool mismatch_at_end = false;
};

using StopRule = std::function<std::optional<TauEvent>(std::span<const State>)>;

/// Jointly simulates continuous-time birth-death chains listed from lowest to
/// highest. Chains sharing a state move together as far as their rates
/// allow; chains in different states move independently. `stop` is checked
/// after every event and ends the run when it returns an event; the run also
/// ends with HitZero once every chain is absorbed.
CouplingTrace run_coupled_chains(std::span<const ChainSpec> chains, std::span<const State> initial,
                                 StreamEngine& rng, double t_max, bool record_path, const StopRule& stop);

/// Sandwich Z <= X <= Y from x_star: Z linear (lambda (1 - 2x*/N), mu),
/// X logistic, Y linear (lambda, mu). Runs until Y hits 0 or 2 x_star.
/// Chains are indexed 0 = Z, 1 = X, 2 = Y.
CouplingTrace run_sandwich_coupling(const ModelParams& p, State x_star, RandomSource rng, double t_max,
                                    bool record_path = false);

/// Two logistic chains from x_low <= x_high under the shared-event rule,
/// run until both are extinct or t_max.
CouplingTrace run_monotone_pair(const ModelParams& p, State x_low, State x_high, RandomSource rng, double t_max);

/// Maximal one-step coupling of Z_k = X_{k delta} (continuous chain observed
/// on the delta grid) with the discrete chain.
class TvCoupling {
public:
    TvCoupling(const ModelParams& p, const DiscreteChainParams& d);

    /// Transition probabilities of the observed chain from x to x + offset,
    /// offset in [-band, band], computed by uniformization of exp(Q delta).
    double observed_probability(State x, int offset) const;
    /// 1 - P(Z_{k+1} = x | Z_k = x).
    double observed_leave(State x) const;
    int band() const noexcept { return band_; }

    std::uint64_t steps_for(double t0) const;

    /// Runs both chains from ic for ceil(K (mu + lambda) N t0) steps.
    CouplingTrace run(const InitialCondition& ic, double t0, StreamEngine& rng) const;

    /// A single coupled step from (discrete, observed) states.
    std::array<State, 2> step(State discrete, State observed, StreamEngine& rng) const;

    const ModelParams& params() const noexcept { return params_; }
    const DiscreteChainParams& chain() const noexcept { return chain_; }

private:
    std::array<State, 2> leave_joint(State x, StreamEngine& rng, bool& split) const;
    std::array<State, 2> leave_apart(State discrete, State observed, StreamEngine& rng) const;
    State sample_observed_move(State x, StreamEngine& rng) const;

    ModelParams params_;
    DiscreteChainParams chain_;
    int band_ = 0;
    // Row x holds offsets -band..band; the diagonal slot stores the leave probability.
    std::vector<double> rows_;
};

CouplingTrace run_tv_coupling(const ModelParams& p, const DiscreteChainParams& d, const InitialCondition& ic,
                              double t0, RandomSource rng);

struct JointMove {
    State x;
    State y;
    double probability;
};

/// One-step kernel of the contraction coupling: coalesced chains move
/// together, otherwise at most one chain moves.
std::vector<JointMove> contraction_kernel(const ModelParams& p, const DiscreteChainParams& d, State x, State y);

/// |X_k - Y_k| for k = 0..steps under the contraction coupling.
std::vector<std::int64_t> run_contraction_pair(const ModelParams& p, const DiscreteChainParams& d, State x_init,
                                               State y_init, std::uint64_t steps, StreamEngine& rng);

}  // namespace sisext
