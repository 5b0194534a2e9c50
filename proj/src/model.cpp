#include "sisext/model.hpp"

#include "sisext/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace sisext {

namespace {

void require_rate(double value, const char* name, bool allow_zero) {
    if (!std::isfinite(value) || value < 0.0 || (!allow_zero && value == 0.0)) {
        throw std::domain_error(std::string("ModelParams: ") + name + " must be " +
                                (allow_zero ? "non-negative" : "positive") + " and finite, got " +
                                std::to_string(value));
    }
}

}  // namespace

ModelParams::ModelParams(std::int64_t N, double lambda, double mu) : N_(N), lambda_(lambda), mu_(mu) {
    if (N < 1) {
        throw std::domain_error("ModelParams: N must be at least 1, got " + std::to_string(N));
    }
    require_rate(lambda, "lambda", true);
    require_rate(mu, "mu", false);
}

ModelParams ModelParams::rescaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::domain_error("ModelParams::rescaled: factor must be positive");
    }
    return ModelParams(N_, c * lambda_, c * mu_);
}

InitialCondition::InitialCondition(const ModelParams& p, State x0)
    : x0_(x0), z0_(static_cast<double>(x0) / static_cast<double>(p.N())) {
    if (x0 < 0 || x0 > p.N()) {
        throw std::domain_error("InitialCondition: x0 = " + std::to_string(x0) + " outside [0, " +
                                std::to_string(p.N()) + "]");
    }
}

Rates rates_logistic(const ModelParams& p, State x) {
    if (x < 0 || x > p.N()) {
        throw std::domain_error("rates_logistic: state " + std::to_string(x) + " outside [0, N]");
    }
    const auto xd = static_cast<double>(x);
    const auto n = static_cast<double>(p.N());
    // (N - x) / N keeps the up rate exactly zero at x = N.
    return {p.lambda() * xd * (static_cast<double>(p.N() - x) / n), p.mu() * xd};
}

Rates rates_linear(const ModelParams& p, State y) {
    if (y < 0) {
        throw std::domain_error("rates_linear: negative state " + std::to_string(y));
    }
    const auto yd = static_cast<double>(y);
    return {p.lambda() * yd, p.mu() * yd};
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "unknown";
}

RegimeClass classify_regime(const ModelParams& p, double threshold) {
    if (!(threshold > 0.0)) {
        throw std::domain_error("classify_regime: threshold must be positive");
    }
    const double severity = p.gap() * std::sqrt(static_cast<double>(p.N()));
    if (severity > threshold) return {Regime::Subcritical, severity};
    if (severity < -threshold) return {Regime::Supercritical, severity};
    return {Regime::Critical, severity};
}

double ode_s(const ModelParams& p, double z) {
    if (p.mu() == p.lambda()) {
        throw SingularParameters("ode_s: mu == lambda, s(z) is undefined");
    }
    if (!(z > 0.0) || z > 1.0) {
        throw std::domain_error("ode_s: z must lie in (0, 1], got " + std::to_string(z));
    }
    const double arg = 1.0 + p.lambda() * z / p.gap();
    if (!(arg > 0.0)) {
        throw std::domain_error("ode_s: 1 + lambda z / (mu - lambda) is not positive");
    }
    return std::log(arg) - std::log(z);
}

OdeSolution::OdeSolution(const ModelParams& p, double z0) : params_(p), z0_(z0) {
    if (p.mu() == p.lambda()) {
        throw SingularParameters("OdeSolution: mu == lambda, closed form requires mu != lambda");
    }
    if (!(z0 > 0.0) || z0 > 1.0) {
        throw std::domain_error("OdeSolution: z0 must lie in (0, 1], got " + std::to_string(z0));
    }
}

double OdeSolution::z(double t) const {
    if (!(t >= 0.0)) {
        throw std::domain_error("ode_z: t must be non-negative");
    }
    const double d = params_.gap();
    const double decay = std::exp(-d * t);
    const double grown = -std::expm1(-d * t);  // 1 - e^{-dt}
    return z0_ * d * decay / (d + z0_ * params_.lambda() * grown);
}

double OdeSolution::drift(double z) const noexcept {
    return params_.lambda() * z * (1.0 - z) - params_.mu() * z;
}

double OdeSolution::t_of_z(double z) const {
    if (!params_.subcritical()) {
        throw std::domain_error("ode_t_of_z: inverse is defined for mu > lambda only");
    }
    if (!(z > 0.0) || z > z0_) {
        throw std::domain_error("ode_t_of_z: z must lie in (0, z0]");
    }
    return (ode_s(params_, z) - ode_s(params_, z0_)) / params_.gap();
}

ScalingFunction::ScalingFunction() : ScalingFunction(standard()) {}

ScalingFunction::ScalingFunction(Fn fn) : fn_(std::move(fn)) {
    if (!fn_) {
        throw std::invalid_argument("ScalingFunction: empty function");
    }
}

ScalingFunction ScalingFunction::standard() {
    return ScalingFunction(Fn([](const ModelParams& p) {
        if (!p.subcritical()) {
            throw std::domain_error("omega(N): the default (mu - lambda)^{1/4} N^{1/8} needs mu > lambda");
        }
        return std::pow(p.gap(), 0.25) * std::pow(static_cast<double>(p.N()), 0.125);
    }));
}

ScalingFunction ScalingFunction::constant(double value) {
    if (!(value > 0.0)) {
        throw std::domain_error("ScalingFunction::constant: value must be positive");
    }
    return ScalingFunction(Fn([value](const ModelParams&) { return value; }));
}

double ScalingFunction::operator()(const ModelParams& p) const {
    const double w = fn_(p);
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::domain_error("omega(N) must be positive and finite");
    }
    return w;
}

bool ScalingFunction::increasing_on(std::span<const ModelParams> family) const {
    for (std::size_t i = 1; i < family.size(); ++i) {
        if (family[i].N() <= family[i - 1].N()) {
            throw std::invalid_argument("ScalingFunction::increasing_on: family must be ordered by N");
        }
        if (!((*this)(family[i]) > (*this)(family[i - 1]))) return false;
    }
    return true;
}

}  // namespace sisext
