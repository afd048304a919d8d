#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "objectives.hpp"

namespace accel {

enum class MethodVariant { GD, NagSC, NagC, HeavyBall, TripleMomentum };

inline constexpr std::array<std::pair<MethodVariant, std::string_view>, 5> kMethodVariantNames{{
    {MethodVariant::GD, "GD"},
    {MethodVariant::NagSC, "NagSC"},
    {MethodVariant::NagC, "NagC"},
    {MethodVariant::HeavyBall, "HeavyBall"},
    {MethodVariant::TripleMomentum, "TripleMomentum"},
}};

inline std::string_view to_string(MethodVariant v) {
    for (const auto& [variant, name] : kMethodVariantNames)
        if (variant == v) return name;
    return "?";
}

inline std::optional<MethodVariant> parse_method_variant(std::string_view name) {
    for (const auto& [variant, n] : kMethodVariantNames)
        if (n == name) return variant;
    return std::nullopt;
}

/// Sign of the NagSC look-ahead. Plus is the accelerated method; Minus is kept as a
/// negative control.
enum class MomentumSign { Plus, Minus };

/// Discrete method plus optional overrides of its default constants.
///
/// `step` is the gradient step (default 1/L; it is α for HeavyBall/TripleMomentum when set).
/// `beta` overrides the momentum of NagSC/HeavyBall/TripleMomentum, `nu` the TripleMomentum
/// look-ahead.
struct MethodSpec {
    MethodVariant variant = MethodVariant::GD;
    std::optional<double> step;
    std::optional<double> beta;
    std::optional<double> nu;
    MomentumSign sign = MomentumSign::Plus;
};

/// Iterate of any method. `x` is the primary sequence, `y` the look-ahead point, `x_prev` the
/// previous x for two-step methods, `theta` the convex-case weight 2/(k+2).
struct IterState {
    std::size_t k = 0;
    Vector x;
    Vector y;
    Vector x_prev;
    double theta = 1.0;

    /// Rest start: y = x_prev = x₀.
    static IterState at(const Vector& x0) { return {0, x0, x0, x0, 1.0}; }
};

// ---------------------------------------------------------------------------
// Default constants

/// (√L − √μ)/(√L + √μ).
inline double nesterov_sc_momentum(const Objective& obj) {
    const double sl = std::sqrt(obj.lip()), sm = std::sqrt(obj.mu());
    return (sl - sm) / (sl + sm);
}

struct HeavyBallParams {
    double alpha;
    double beta;
};

/// Polyak tuning: α = 4/(√L+√μ)², β = ((√L−√μ)/(√L+√μ))².
inline HeavyBallParams polyak_params(const Objective& obj) {
    const double sl = std::sqrt(obj.lip()), sm = std::sqrt(obj.mu());
    const double r = (sl - sm) / (sl + sm);
    return {4.0 / ((sl + sm) * (sl + sm)), r * r};
}

struct TripleMomentumParams {
    double alpha;
    double beta;
    double nu;
};

/// ρ = 1 − 1/√κ, α = (1+ρ)/L, β = ρ²/(2−ρ), ν = ρ²/((1+ρ)(2−ρ)).
inline TripleMomentumParams triple_momentum_params(const Objective& obj) {
    if (!obj.strongly_convex()) throw Inapplicable("triple momentum needs mu > 0");
    const double rho = 1.0 - 1.0 / std::sqrt(condition_number(obj));
    return {(1.0 + rho) / obj.lip(), rho * rho / (2.0 - rho),
            rho * rho / ((1.0 + rho) * (2.0 - rho))};
}

// ---------------------------------------------------------------------------
// Steppers. All are pure: same inputs, same output.

inline IterState gd_step(const IterState& s, const Objective& obj, double step) {
    if (!(step > 0.0)) throw InvalidSpec("gradient step must be > 0");
    Vector next = s.x - step * obj.gradient(s.x);
    return {s.k + 1, next, next, s.x, s.theta};
}

/// x⁺ = y − (1/L)∇f(y); y⁺ = x⁺ ± β(x⁺ − x).
inline IterState nag_sc_step(const IterState& s, const Objective& obj,
                             MomentumSign sign = MomentumSign::Plus,
                             std::optional<double> beta_override = std::nullopt) {
    if (!obj.strongly_convex()) throw Inapplicable("NagSC needs mu > 0");
    const double beta = beta_override.value_or(nesterov_sc_momentum(obj));
    const double signed_beta = sign == MomentumSign::Plus ? beta : -beta;
    Vector next = s.y - obj.gradient(s.y) / obj.lip();
    Vector look = next + signed_beta * (next - s.x);
    return {s.k + 1, std::move(next), std::move(look), s.x, s.theta};
}

/// x⁺ = y − (1/L)∇f(y); y⁺ = x⁺ + (k/(k+3))(x⁺ − x). The gradient is taken at y.
inline IterState nag_c_step(const IterState& s, const Objective& obj, std::size_t k) {
    const double kk = static_cast<double>(k);
    const double momentum = kk / (kk + 3.0);
    Vector next = s.y - obj.gradient(s.y) / obj.lip();
    Vector look = next + momentum * (next - s.x);
    return {s.k + 1, std::move(next), std::move(look), s.x, 2.0 / (kk + 3.0)};
}

/// x⁺ = x + β(x − x_prev) − α∇f(x).
inline IterState heavy_ball_step(const IterState& s, const Objective& obj, double alpha, double beta) {
    if (!(alpha > 0.0)) throw InvalidSpec("heavy-ball alpha must be > 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidSpec("heavy-ball beta must lie in [0, 1)");
    Vector next = s.x + beta * (s.x - s.x_prev) - alpha * obj.gradient(s.x);
    return {s.k + 1, next, next, s.x, s.theta};
}

/// x⁺ = x + β(x − x_prev) − α∇f(y); y⁺ = x⁺ + ν(x⁺ − x).
inline IterState tm_step(const IterState& s, const Objective& obj, const TripleMomentumParams& p) {
    if (!obj.strongly_convex()) throw Inapplicable("triple momentum needs mu > 0");
    Vector next = s.x + p.beta * (s.x - s.x_prev) - p.alpha * obj.gradient(s.y);
    Vector look = next + p.nu * (next - s.x);
    return {s.k + 1, std::move(next), std::move(look), s.x, s.theta};
}

// ---------------------------------------------------------------------------

/// Iterates with per-step records. Index i of every vector belongs to states[i].
struct Trajectory {
    std::vector<IterState> states;
    std::vector<double> f_values;
    std::vector<double> f_gaps;
    std::vector<double> grad_norms;
    std::size_t monotone_violations = 0;
    std::string objective_tag;

    std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }

    /// f(x_{k+1}) > f(x_k) + 1e-14 for the step into index k+1.
    bool monotone_flag(std::size_t i) const {
        return i > 0 && f_values[i] > f_values[i - 1] + kMonotoneSlack;
    }

    static constexpr double kMonotoneSlack = 1e-14;
};

/// Single step of `method` from `s`.
inline IterState method_step(const MethodSpec& method, const IterState& s, const Objective& obj) {
    switch (method.variant) {
    case MethodVariant::GD:
        return gd_step(s, obj, method.step.value_or(1.0 / obj.lip()));
    case MethodVariant::NagSC:
        return nag_sc_step(s, obj, method.sign, method.beta);
    case MethodVariant::NagC:
        return nag_c_step(s, obj, s.k);
    case MethodVariant::HeavyBall: {
        const HeavyBallParams p = polyak_params(obj);
        return heavy_ball_step(s, obj, method.step.value_or(p.alpha), method.beta.value_or(p.beta));
    }
    case MethodVariant::TripleMomentum: {
        TripleMomentumParams p = triple_momentum_params(obj);
        if (method.step) p.alpha = *method.step;
        if (method.beta) p.beta = *method.beta;
        if (method.nu) p.nu = *method.nu;
        return tm_step(s, obj, p);
    }
    }
    throw InvalidSpec("unknown method variant");
}

/// Iterate until ‖∇f(x_k)‖ ≤ grad_tol or max_iters steps have been taken.
inline Trajectory run(const MethodSpec& method, const Objective& obj, const Vector& x0,
                      std::size_t max_iters, double grad_tol) {
    if (max_iters < 1) throw InvalidSpec("max_iters must be >= 1");
    if (x0.size() != obj.dim()) throw InvalidSpec("initial point dimension mismatch");
    if ((method.variant == MethodVariant::NagSC || method.variant == MethodVariant::TripleMomentum) &&
        !obj.strongly_convex())
        throw Inapplicable(std::string(to_string(method.variant)) + " needs mu > 0");

    Trajectory traj;
    traj.objective_tag = obj.tag();
    auto record = [&](IterState s) {
        const double f = obj.value(s.x);
        if (!std::isfinite(f) || !s.x.allFinite() || !s.y.allFinite())
            throw DivergenceError("non-finite iterate", s.k);
        const double gn = obj.gradient(s.x).norm();
        traj.f_values.push_back(f);
        traj.f_gaps.push_back(obj.fmin() ? f - *obj.fmin() : std::numeric_limits<double>::quiet_NaN());
        traj.grad_norms.push_back(gn);
        traj.states.push_back(std::move(s));
        if (traj.monotone_flag(traj.states.size() - 1)) ++traj.monotone_violations;
        return gn;
    };

    IterState s = IterState::at(x0);
    double gn = record(s);
    for (std::size_t i = 0; i < max_iters && !(gn <= grad_tol); ++i) {
        s = method_step(method, s, obj);
        gn = record(s);
    }
    return traj;
}

} // namespace accel
