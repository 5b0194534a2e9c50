#pragma once

// Model parameters, transition rates of the logistic (SIS) and linear
// birth-death chains, regime classification and the closed-form solution
// of the logistic (Verhulst) ODE dz/dt = lambda z (1 - z) - mu z.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

namespace sisext {

using State = std::int64_t;

/// Population size N with infection rate lambda and recovery rate mu.
///
/// lambda == 0 is accepted and describes the pure-death chain; every other
/// value must be strictly positive and finite.
class ModelParams {
public:
    ModelParams(std::int64_t N, double lambda, double mu);

    std::int64_t N() const noexcept { return N_; }
    double lambda() const noexcept { return lambda_; }
    double mu() const noexcept { return mu_; }

    double gap() const noexcept { return mu_ - lambda_; }
    bool subcritical() const noexcept { return mu_ > lambda_; }

    /// Same N, both rates multiplied by c > 0.
    ModelParams rescaled(double c) const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    std::int64_t N_;
    double lambda_;
    double mu_;
};

class InitialCondition {
public:
    InitialCondition(const ModelParams& p, State x0);

    State x0() const noexcept { return x0_; }
    double z0() const noexcept { return z0_; }

private:
    State x0_;
    double z0_;
};

struct Rates {
    double up;
    double down;

    double total() const noexcept { return up + down; }
};

/// (lambda x (1 - x/N), mu x) for 0 <= x <= N.
Rates rates_logistic(const ModelParams& p, State x);

/// (lambda y, mu y) for y >= 0; N is ignored.
Rates rates_linear(const ModelParams& p, State y);

enum class Regime { Subcritical, Critical, Supercritical };

std::string_view to_string(Regime r);

struct RegimeClass {
    Regime kind;
    double severity;  // (mu - lambda) sqrt(N)
};

inline constexpr double default_regime_threshold = 3.0;

RegimeClass classify_regime(const ModelParams& p, double threshold = default_regime_threshold);

/// s(z) = log(1 + lambda z / (mu - lambda)) - log z on (0, 1].
double ode_s(const ModelParams& p, double z);

/// Closed-form solution z(t) of the logistic ODE started from z0 = x0 / N.
class OdeSolution {
public:
    OdeSolution(const ModelParams& p, double z0);
    OdeSolution(const ModelParams& p, const InitialCondition& ic) : OdeSolution(p, ic.z0()) {}

    double z0() const noexcept { return z0_; }
    const ModelParams& params() const noexcept { return params_; }

    double z(double t) const;

    /// Right-hand side of the ODE at z.
    double drift(double z) const noexcept;

    /// Time at which the solution reaches z, for 0 < z <= z0 (subcritical
    /// solutions only reach every such level).
    double t_of_z(double z) const;

private:
    ModelParams params_;
    double z0_;
};

inline double ode_z(const OdeSolution& sol, double t) { return sol.z(t); }
inline double ode_t_of_z(const OdeSolution& sol, double z) { return sol.t_of_z(z); }

/// omega(N); the default is (mu - lambda)^{1/4} N^{1/8}.
class ScalingFunction {
public:
    using Fn = std::function<double(const ModelParams&)>;

    ScalingFunction();
    explicit ScalingFunction(Fn fn);

    static ScalingFunction standard();
    static ScalingFunction constant(double value);

    double operator()(const ModelParams& p) const;

    /// Strictly increasing along a parameter family ordered by N: the
    /// finite-grid proxy for omega(N) -> infinity.
    bool increasing_on(std::span<const ModelParams> family) const;

private:
    Fn fn_;
};

}  // namespace sisext
