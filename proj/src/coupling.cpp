#include "sisext/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sisext {

std::string_view to_string(TauEvent e) {
    switch (e) {
        case TauEvent::HitZero: return "hit_zero";
        case TauEvent::HitUpperBoundary: return "hit_upper_boundary";
        case TauEvent::Censored: return "censored";
    }
    return "unknown";
}

namespace {

constexpr std::size_t kMaxChains = 8;

struct Channel {
    double rate;
    unsigned mask;
    int direction;
};

// Nested shared-move channels for one group of chains sitting in the same
// state: the chains with the largest rates form the innermost set.
void add_nested_channels(std::span<const std::size_t> members, std::span<const double> rates, int direction,
                         std::vector<Channel>& out) {
    std::array<std::size_t, kMaxChains> order{};
    const std::size_t m = members.size();
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m),
                     [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });
    double prev = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double rate = rates[order[r]] - prev;
        prev = rates[order[r]];
        if (rate <= 0.0) continue;
        unsigned mask = 0;
        for (std::size_t s = r; s < m; ++s) mask |= 1u << members[order[s]];
        out.push_back({rate, mask, direction});
    }
}

}  // namespace

CouplingTrace run_coupled_chains(std::span<const ChainSpec> chains, std::span<const State> initial,
                                 StreamEngine& rng, double t_max, bool record_path, const StopRule& stop) {
    const std::size_t m = chains.size();
    if (m == 0 || m > kMaxChains || initial.size() != m) {
        throw std::domain_error("run_coupled_chains: need 1..8 chains with one initial state each");
    }
    if (!(t_max > 0.0)) throw std::domain_error("run_coupled_chains: t_max must be positive");
    for (std::size_t i = 0; i < m; ++i) {
        if (initial[i] < 0) throw std::domain_error("run_coupled_chains: negative initial state");
        if (i > 0 && initial[i] < initial[i - 1]) {
            throw std::domain_error("run_coupled_chains: initial states must be ordered low to high");
        }
    }

    CouplingTrace trace;
    trace.chain_count = m;
    trace.extinction_times.assign(m, std::nullopt);
    std::vector<State> x(initial.begin(), initial.end());
    for (std::size_t i = 0; i < m; ++i) {
        if (x[i] == 0) trace.extinction_times[i] = 0.0;
    }

    std::vector<Channel> channels;
    channels.reserve(4 * m);
    std::array<std::size_t, kMaxChains> members{};
    std::array<double, kMaxChains> up{}, down{};
    double t = 0.0;

    auto all_absorbed = [&] { return std::all_of(x.begin(), x.end(), [](State s) { return s == 0; }); };

    bool stopped = false;
    if (stop) {
        if (auto ev = stop(x)) {
            trace.tau_event = *ev;
            stopped = true;
        }
    }
    while (!stopped) {
        if (all_absorbed()) {
            trace.tau_event = TauEvent::HitZero;
            break;
        }
        channels.clear();
        unsigned seen = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (seen & (1u << i)) continue;
            std::size_t g = 0;
            for (std::size_t j = i; j < m; ++j) {
                if (x[j] == x[i]) {
                    members[g] = j;
                    const Rates r = chains[j].rates(x[j]);
                    up[g] = r.up;
                    down[g] = r.down;
                    ++g;
                    seen |= 1u << j;
                }
            }
            const std::span<const std::size_t> grp(members.data(), g);
            add_nested_channels(grp, std::span<const double>(up.data(), g), +1, channels);
            add_nested_channels(grp, std::span<const double>(down.data(), g), -1, channels);
        }
        double total = 0.0;
        for (const auto& c : channels) total += c.rate;
        if (!(total > 0.0)) {
            trace.tau_event = TauEvent::HitZero;
            break;
        }
        const double wait = rng.exponential(total);
        if (t + wait > t_max) {
            t = t_max;
            trace.tau_event = TauEvent::Censored;
            break;
        }
        t += wait;

        double u = rng.uniform() * total;
        std::size_t pick = channels.size() - 1;
        for (std::size_t c = 0; c < channels.size(); ++c) {
            if (u < channels[c].rate) {
                pick = c;
                break;
            }
            u -= channels[c].rate;
        }
        const Channel& ch = channels[pick];
        std::optional<State> shared;
        for (std::size_t j = 0; j < m; ++j) {
            if (!(ch.mask & (1u << j))) continue;
            if (shared && *shared != x[j]) trace.split_jump_violation = true;
            shared = x[j];
            x[j] += ch.direction;
        }
        ++trace.event_count;
        for (std::size_t j = 0; j < m; ++j) {
            if (j + 1 < m && x[j] > x[j + 1]) trace.ordering_violated = true;
            if (x[j] == 0 && !trace.extinction_times[j]) trace.extinction_times[j] = t;
        }
        if (record_path) {
            trace.times.push_back(t);
            trace.states.insert(trace.states.end(), x.begin(), x.end());
        }
        if (stop) {
            if (auto ev = stop(x)) {
                trace.tau_event = *ev;
                break;
            }
        }
    }
    trace.tau = t;
    trace.final_states = x;
    return trace;
}

CouplingTrace run_sandwich_coupling(const ModelParams& p, State x_star, RandomSource src, double t_max,
                                    bool record_path) {
    if (!p.subcritical()) throw std::domain_error("run_sandwich_coupling: requires mu > lambda");
    if (x_star < 1 || x_star > p.N()) {
        throw std::domain_error("run_sandwich_coupling: x_star must lie in [1, N]");
    }
    double lower_lambda = p.lambda() * (1.0 - 2.0 * static_cast<double>(x_star) / static_cast<double>(p.N()));
    const bool clamped = lower_lambda < 0.0;
    if (clamped) lower_lambda = 0.0;

    const std::array<ChainSpec, 3> chains{
        ChainSpec{ChainKind::Linear, ModelParams(p.N(), lower_lambda, p.mu())},
        ChainSpec{ChainKind::Logistic, p},
        ChainSpec{ChainKind::Linear, p},
    };
    const std::array<State, 3> init{x_star, x_star, x_star};
    const State boundary = 2 * x_star;
    StreamEngine rng(src);
    auto trace = run_coupled_chains(chains, init, rng, t_max, record_path,
                                    [boundary](std::span<const State> s) -> std::optional<TauEvent> {
                                        if (s[2] == 0) return TauEvent::HitZero;
                                        if (s[2] >= boundary) return TauEvent::HitUpperBoundary;
                                        return std::nullopt;
                                    });
    trace.lambda_clamped = clamped;
    return trace;
}

CouplingTrace run_monotone_pair(const ModelParams& p, State x_low, State x_high, RandomSource src, double t_max) {
    if (x_low < 0 || x_high > p.N() || x_low > x_high) {
        throw std::domain_error("run_monotone_pair: need 0 <= x_low <= x_high <= N");
    }
    const std::array<ChainSpec, 2> chains{ChainSpec{ChainKind::Logistic, p}, ChainSpec{ChainKind::Logistic, p}};
    const std::array<State, 2> init{x_low, x_high};
    StreamEngine rng(src);
    return run_coupled_chains(chains, init, rng, t_max, false, StopRule{});
}

// --- maximal coupling of the observed continuous chain and the discrete chain

TvCoupling::TvCoupling(const ModelParams& p, const DiscreteChainParams& d) : params_(p), chain_(d) {
    // Uniformize at Lambda = (mu + lambda) N, so Lambda delta = 1/K and
    // exp(Q delta) = sum_n Poisson(1/K; n) P_u^n with P_u = I + Q / Lambda.
    const double a = 1.0 / d.K();
    double term = a;
    band_ = 1;
    while (term / (band_ + 1) * a > 1e-22) {
        term *= a / (band_ + 1);
        ++band_;
    }
    const auto n_states = static_cast<std::size_t>(p.N()) + 1;
    const auto width = static_cast<std::size_t>(2 * band_ + 1);
    rows_.assign(n_states * width, 0.0);

    const double big_lambda = (p.mu() + p.lambda()) * static_cast<double>(p.N());
    std::vector<double> up(n_states), down(n_states);
    for (std::size_t x = 0; x < n_states; ++x) {
        const Rates r = rates_logistic(p, static_cast<State>(x));
        up[x] = r.up / big_lambda;
        down[x] = r.down / big_lambda;
    }

    std::vector<double> cur(width), next(width), acc(width);
    const auto b = static_cast<std::ptrdiff_t>(band_);
    for (std::size_t x = 0; x < n_states; ++x) {
        std::fill(cur.begin(), cur.end(), 0.0);
        cur[static_cast<std::size_t>(b)] = 1.0;
        double coef = std::exp(-a);
        for (std::size_t j = 0; j < width; ++j) acc[j] = coef * cur[j];
        for (int order = 1; order <= band_; ++order) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(width); ++j) {
                const auto ju = static_cast<std::size_t>(j);
                if (cur[ju] == 0.0) continue;
                const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(x) + j - b;
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(n_states)) continue;
                const auto yu = static_cast<std::size_t>(y);
                next[ju] += cur[ju] * (1.0 - up[yu] - down[yu]);
                if (j + 1 < static_cast<std::ptrdiff_t>(width)) next[ju + 1] += cur[ju] * up[yu];
                if (j > 0) next[ju - 1] += cur[ju] * down[yu];
            }
            cur.swap(next);
            coef *= a / order;
            for (std::size_t j = 0; j < width; ++j) acc[j] += coef * cur[j];
        }
        double leave = 0.0;
        double* row = rows_.data() + x * width;
        for (std::size_t j = 0; j < width; ++j) {
            if (j == static_cast<std::size_t>(b)) continue;
            row[j] = acc[j];
            leave += acc[j];
        }
        row[b] = leave;
    }
}

double TvCoupling::observed_probability(State x, int offset) const {
    if (x < 0 || x > params_.N()) throw std::domain_error("TvCoupling: state outside [0, N]");
    if (offset < -band_ || offset > band_) return 0.0;
    const double* row = rows_.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(2 * band_ + 1);
    if (offset == 0) return 1.0 - row[band_];
    return row[band_ + offset];
}

double TvCoupling::observed_leave(State x) const {
    if (x < 0 || x > params_.N()) throw std::domain_error("TvCoupling: state outside [0, N]");
    return rows_[static_cast<std::size_t>(x) * static_cast<std::size_t>(2 * band_ + 1) +
                 static_cast<std::size_t>(band_)];
}

std::uint64_t TvCoupling::steps_for(double t0) const {
    return static_cast<std::uint64_t>(
        std::ceil(chain_.K() * (params_.mu() + params_.lambda()) * static_cast<double>(params_.N()) * t0));
}

State TvCoupling::sample_observed_move(State x, StreamEngine& rng) const {
    // Conditioned on leaving x.
    const double* row = rows_.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(2 * band_ + 1);
    double u = rng.uniform() * row[band_];
    int last = 0;
    for (int off = -band_; off <= band_; ++off) {
        if (off == 0) continue;
        const double pr = row[band_ + off];
        if (pr <= 0.0) continue;
        last = off;
        if (u < pr) return x + off;
        u -= pr;
    }
    return x + last;
}

std::array<State, 2> TvCoupling::leave_joint(State x, StreamEngine& rng, bool& split) const {
    const StepProbabilities pd = discrete_step_probabilities(params_, chain_, x);
    const double obs_leave = observed_leave(x);
    const double leave = std::max(pd.leave(), obs_leave);
    const double up_obs = observed_probability(x, +1);
    const double down_obs = observed_probability(x, -1);
    const double m_up = std::min(pd.up, up_obs);
    const double m_down = std::min(pd.down, down_obs);

    double u = rng.uniform() * leave;
    split = false;
    if (u < m_up) return {x + 1, x + 1};
    u -= m_up;
    if (u < m_down) return {x - 1, x - 1};
    split = true;

    // Residual laws of the maximal coupling; their supports are disjoint.
    const double r_up = pd.up - m_up;
    const double r_down = pd.down - m_down;
    const double r_hold = std::max(0.0, obs_leave - pd.leave());
    const double r_total = r_up + r_down + r_hold;
    State xd = x;
    double v = rng.uniform() * r_total;
    if (v < r_up) {
        xd = x + 1;
    } else if (v < r_up + r_down) {
        xd = x - 1;
    }

    const double* row = rows_.data() + static_cast<std::size_t>(x) * static_cast<std::size_t>(2 * band_ + 1);
    const double ro_hold = std::max(0.0, pd.leave() - obs_leave);
    double ro_total = ro_hold;
    for (int off = -band_; off <= band_; ++off) {
        if (off == 0) continue;
        double pr = row[band_ + off];
        if (off == 1) pr -= m_up;
        if (off == -1) pr -= m_down;
        ro_total += std::max(0.0, pr);
    }
    State xo = x;
    double w = rng.uniform() * ro_total;
    if (w >= ro_hold) {
        w -= ro_hold;
        for (int off = -band_; off <= band_; ++off) {
            if (off == 0) continue;
            double pr = row[band_ + off];
            if (off == 1) pr -= m_up;
            if (off == -1) pr -= m_down;
            pr = std::max(0.0, pr);
            if (pr <= 0.0) continue;
            xo = x + off;
            if (w < pr) break;
            w -= pr;
        }
    }
    return {xd, xo};
}

std::array<State, 2> TvCoupling::leave_apart(State xd, State xo, StreamEngine& rng) const {
    const StepProbabilities pd = discrete_step_probabilities(params_, chain_, xd);
    const double a = pd.leave();
    const double b = observed_leave(xo);
    const double only_d = a * (1.0 - b);
    const double only_o = (1.0 - a) * b;
    const double either = a + b - a * b;
    const double u = rng.uniform() * either;
    const bool move_d = u < only_d || u >= only_d + only_o;
    const bool move_o = u >= only_d;
    State nd = xd, no = xo;
    if (move_d) nd = rng.uniform() * a < pd.up ? xd + 1 : xd - 1;
    if (move_o) no = sample_observed_move(xo, rng);
    return {nd, no};
}

std::array<State, 2> TvCoupling::step(State xd, State xo, StreamEngine& rng) const {
    if (xd == xo) {
        const double leave = std::max(discrete_step_probabilities(params_, chain_, xd).leave(), observed_leave(xo));
        if (rng.uniform() >= leave) return {xd, xo};
        bool split = false;
        return leave_joint(xd, rng, split);
    }
    const double a = discrete_step_probabilities(params_, chain_, xd).leave();
    const double b = observed_leave(xo);
    if (rng.uniform() >= a + b - a * b) return {xd, xo};
    return leave_apart(xd, xo, rng);
}

CouplingTrace TvCoupling::run(const InitialCondition& ic, double t0, StreamEngine& rng) const {
    if (!(t0 > 0.0)) throw std::domain_error("run_tv_coupling: t0 must be positive");
    const std::uint64_t k_end = steps_for(t0);
    CouplingTrace trace;
    trace.chain_count = 2;
    State xd = ic.x0();
    State xo = ic.x0();
    std::uint64_t k = 0;
    while (k < k_end) {
        if (xd == xo) {
            if (xd == 0) break;
            const double leave =
                std::max(discrete_step_probabilities(params_, chain_, xd).leave(), observed_leave(xo));
            const std::uint64_t holds = rng.geometric(leave);
            if (holds >= k_end - k) break;
            k += holds + 1;
            bool split = false;
            const auto nxt = leave_joint(xd, rng, split);
            xd = nxt[0];
            xo = nxt[1];
            if (split && !trace.first_mismatch_step) trace.first_mismatch_step = k;
            if (xd != xo) ++trace.mismatch_count;
        } else {
            const double a = discrete_step_probabilities(params_, chain_, xd).leave();
            const double b = observed_leave(xo);
            const std::uint64_t holds = rng.geometric(a + b - a * b);
            if (holds >= k_end - k) {
                trace.mismatch_count += k_end - k;
                break;
            }
            trace.mismatch_count += holds;
            k += holds + 1;
            const auto nxt = leave_apart(xd, xo, rng);
            xd = nxt[0];
            xo = nxt[1];
            if (xd != xo) ++trace.mismatch_count;
        }
        ++trace.event_count;
    }
    trace.mismatch_at_end = xd != xo;
    trace.final_states = {xd, xo};
    trace.tau = static_cast<double>(k_end) * chain_.delta(params_);
    trace.tau_event = TauEvent::Censored;
    return trace;
}

CouplingTrace run_tv_coupling(const ModelParams& p, const DiscreteChainParams& d, const InitialCondition& ic,
                              double t0, RandomSource src) {
    const TvCoupling coupling(p, d);
    StreamEngine rng(src);
    return coupling.run(ic, t0, rng);
}

// --- contraction coupling of two discrete chains

std::vector<JointMove> contraction_kernel(const ModelParams& p, const DiscreteChainParams& d, State x, State y) {
    if (x < 0 || y < 0 || x > p.N() || y > p.N()) {
        throw std::domain_error("contraction_kernel: states must lie in [0, N]");
    }
    std::vector<JointMove> moves;
    const StepProbabilities px = discrete_step_probabilities(p, d, x);
    auto push = [&](State a, State b, double pr) {
        if (pr > 0.0) moves.push_back({a, b, pr});
    };
    if (x == y) {
        push(x + 1, y + 1, px.up);
        push(x - 1, y - 1, px.down);
        push(x, y, px.hold);
        return moves;
    }
    const StepProbabilities py = discrete_step_probabilities(p, d, y);
    push(x + 1, y, px.up);
    push(x - 1, y, px.down);
    push(x, y + 1, py.up);
    push(x, y - 1, py.down);
    push(x, y, 1.0 - px.leave() - py.leave());
    return moves;
}

std::vector<std::int64_t> run_contraction_pair(const ModelParams& p, const DiscreteChainParams& d, State x_init,
                                               State y_init, std::uint64_t steps, StreamEngine& rng) {
    std::vector<std::int64_t> dist;
    dist.reserve(steps + 1);
    State x = x_init, y = y_init;
    dist.push_back(std::abs(x - y));
    for (std::uint64_t k = 0; k < steps; ++k) {
        const auto moves = contraction_kernel(p, d, x, y);
        double u = rng.uniform();
        const JointMove* chosen = &moves.back();
        for (const auto& mv : moves) {
            if (u < mv.probability) {
                chosen = &mv;
                break;
            }
            u -= mv.probability;
        }
        x = chosen->x;
        y = chosen->y;
        dist.push_back(std::abs(x - y));
    }
    return dist;
}

}  // namespace sisext
