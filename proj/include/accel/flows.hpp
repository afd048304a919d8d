#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "objectives.hpp"

namespace accel {

enum class FlowVariant {
    GradientFlow,
    ControlledNaim,
    PerturbedNaim,
    HighResSC,
    HighResConvex,
    HeavyBallFlow,
    TripleMomentumFlow,
};

inline constexpr std::array<std::pair<FlowVariant, std::string_view>, 7> kFlowVariantNames{{
    {FlowVariant::GradientFlow, "GradientFlow"},
    {FlowVariant::ControlledNaim, "ControlledNaim"},
    {FlowVariant::PerturbedNaim, "PerturbedNaim"},
    {FlowVariant::HighResSC, "HighResSC"},
    {FlowVariant::HighResConvex, "HighResConvex"},
    {FlowVariant::HeavyBallFlow, "HeavyBallFlow"},
    {FlowVariant::TripleMomentumFlow, "TripleMomentumFlow"},
}};

inline std::string_view to_string(FlowVariant v) {
    for (const auto& [variant, name] : kFlowVariantNames)
        if (variant == v) return name;
    return "?";
}

inline std::optional<FlowVariant> parse_flow_variant(std::string_view name) {
    for (const auto& [variant, n] : kFlowVariantNames)
        if (n == name) return variant;
    return std::nullopt;
}

/// A continuous-time system plus its parameters. Unset parameters take defaults from the
/// objective when resolved:
///   rate  (GradientFlow)              1/L
///   alpha (Controlled/PerturbedNaim)  μ
///   beta  (Controlled/PerturbedNaim)  1/L
///   gamma (TripleMomentumFlow)        1/√L
///   t0    (HighResConvex)             1/√L
struct FlowSpec {
    FlowVariant variant = FlowVariant::GradientFlow;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> rate;
    std::optional<double> t0;
};

inline bool is_second_order(FlowVariant v) { return v != FlowVariant::GradientFlow; }

/// Fill every parameter the variant uses. `fallback` supplies alpha/beta for the NAIM variants
/// before the objective-derived defaults are tried.
inline FlowSpec resolve(const FlowSpec& spec, const Objective& obj,
                        const ManifoldParams* fallback = nullptr) {
    FlowSpec out = spec;
    const double inv_sqrt_l = 1.0 / std::sqrt(obj.lip());
    switch (spec.variant) {
    case FlowVariant::GradientFlow:
        if (!out.rate) out.rate = 1.0 / obj.lip();
        break;
    case FlowVariant::ControlledNaim:
    case FlowVariant::PerturbedNaim:
        if (!out.alpha) {
            if (fallback) out.alpha = fallback->alpha;
            else if (obj.strongly_convex()) out.alpha = obj.mu();
            else throw InvalidSpec(std::string(to_string(spec.variant)) + " needs alpha when mu = 0");
        }
        if (!out.beta) out.beta = fallback ? fallback->beta : 1.0 / obj.lip();
        break;
    case FlowVariant::TripleMomentumFlow:
        if (!out.gamma) out.gamma = inv_sqrt_l;
        break;
    case FlowVariant::HighResConvex:
        if (!out.t0) out.t0 = inv_sqrt_l;
        break;
    case FlowVariant::HighResSC:
    case FlowVariant::HeavyBallFlow:
        break;
    }
    for (const auto& v : {out.alpha, out.beta, out.gamma, out.rate, out.t0})
        if (v && !(*v > 0.0)) throw InvalidSpec("flow rate parameters must be > 0");
    return out;
}

struct PhaseVelocity {
    Vector dx1;
    Vector dx2;
};

/// Phase-space velocity of the chosen system at `s`. For the second-order variants
/// dx1 = x₂ and dx2 = ẍ as below (H = ∇²f(x₁), g = ∇f(x₁), v = x₂):
///
///   ControlledNaim      −βHv − αv − αβg
///   PerturbedNaim       −βHv − α(v + βg) − α(v + g/α)
///   HighResSC           −(1/√L)Hv − 2√μ v − (1 + √(μ/L))g
///   HighResConvex       −(3/t)v − (1/√L)Hv − (1 + 3/(2√L))g
///   HeavyBallFlow       −2√μ v − (1 + √(μ/L))g
///   TripleMomentumFlow  −(1/L + γ)Hv − μv − (1 + μ/L)g
///
/// GradientFlow is first order: dx1 = −rate·g and dx2 = 0.
inline PhaseVelocity rhs(const FlowSpec& spec_in, const PhaseState& s, const Objective& obj) {
    detail::require_same_dim(s, obj);
    const FlowSpec spec = resolve(spec_in, obj);
    const Vector g = obj.gradient(s.x1);
    const Vector& v = s.x2;
    const double mu = obj.mu();
    const double lip = obj.lip();

    switch (spec.variant) {
    case FlowVariant::GradientFlow:
        return {-*spec.rate * g, Vector::Zero(s.x2.size())};
    case FlowVariant::ControlledNaim: {
        const double a = *spec.alpha, b = *spec.beta;
        return {v, -b * obj.hess_vec(s.x1, v) - a * v - a * b * g};
    }
    case FlowVariant::PerturbedNaim: {
        const double a = *spec.alpha, b = *spec.beta;
        return {v, -b * obj.hess_vec(s.x1, v) - a * (v + b * g) - a * (v + g / a)};
    }
    case FlowVariant::HighResSC:
        return {v, -obj.hess_vec(s.x1, v) / std::sqrt(lip) - 2.0 * std::sqrt(mu) * v -
                       (1.0 + std::sqrt(mu / lip)) * g};
    case FlowVariant::HighResConvex:
        if (s.t < *spec.t0)
            throw DomainError("HighResConvex evaluated before t0 (t = " + detail::fmt_real(s.t) + ")");
        return {v, -(3.0 / s.t) * v - obj.hess_vec(s.x1, v) / std::sqrt(lip) -
                       (1.0 + 1.5 / std::sqrt(lip)) * g};
    case FlowVariant::HeavyBallFlow:
        return {v, -2.0 * std::sqrt(mu) * v - (1.0 + std::sqrt(mu / lip)) * g};
    case FlowVariant::TripleMomentumFlow:
        return {v, -(1.0 / lip + *spec.gamma) * obj.hess_vec(s.x1, v) - mu * v -
                       (1.0 + mu / lip) * g};
    }
    throw InvalidSpec("unknown flow variant");
}

struct FlowSample {
    PhaseState state;
    double f_gap = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = 0.0;
    double m0_residual_norm = 0.0;
    double mp_residual_norm = 0.0;
    double storage = 0.0;
};

struct FlowTrajectory {
    std::vector<FlowSample> samples;
    double step = 0.0;
    FlowSpec spec;
    std::string objective_tag;
};

namespace detail {

inline FlowSample make_sample(const PhaseState& s, const Objective& obj, const ManifoldParams& p) {
    FlowSample out;
    out.state = s;
    out.f_gap = obj.f_gap(s.x1);
    out.grad_norm = obj.gradient(s.x1).norm();
    const Vector m = residual_m0(s, obj, p);
    out.m0_residual_norm = m.norm();
    out.mp_residual_norm = residual_mp(s, obj, p).norm();
    out.storage = accel::storage(m);
    return out;
}

inline bool finite(const PhaseState& s) { return s.x1.allFinite() && s.x2.allFinite(); }

} // namespace detail

/// Default RK4 step 0.01/√L.
inline double default_flow_step(const Objective& obj) { return 0.01 / std::sqrt(obj.lip()); }

/// Classical fixed-step RK4. Returns steps + 1 samples starting at `initial`.
///
/// For GradientFlow the stored x₂ is the flow velocity −rate·∇f(x₁), so the samples sit on
/// M₀ when β equals the rate. Explicit RK4 stays stable for h ≲ 2/√L on the second-order
/// variants; nothing enforces that here.
inline FlowTrajectory integrate(const FlowSpec& spec_in, const Objective& obj,
                                const PhaseState& initial, double h, std::size_t steps,
                                const ManifoldParams& params) {
    if (!(h > 0.0)) throw InvalidSpec("integration step must be > 0");
    if (steps < 1) throw InvalidSpec("integration needs at least one step");
    detail::require_same_dim(initial, obj);
    const FlowSpec spec = resolve(spec_in, obj, &params);
    if (spec.variant == FlowVariant::HighResConvex && initial.t < *spec.t0)
        throw DomainError("HighResConvex initial time precedes t0");

    const bool first_order = !is_second_order(spec.variant);
    auto velocity_fix = [&](PhaseState& s) {
        if (first_order) s.x2 = -*spec.rate * obj.gradient(s.x1);
    };

    FlowTrajectory traj;
    traj.step = h;
    traj.spec = spec;
    traj.objective_tag = obj.tag();
    traj.samples.reserve(steps + 1);

    PhaseState s = initial;
    velocity_fix(s);
    traj.samples.push_back(detail::make_sample(s, obj, params));

    auto shifted = [](const PhaseState& base, const PhaseVelocity& k, double w, double dt) {
        return PhaseState{base.x1 + w * k.dx1, base.x2 + w * k.dx2, base.t + dt};
    };

    for (std::size_t i = 0; i < steps; ++i) {
        const PhaseVelocity k1 = rhs(spec, s, obj);
        const PhaseVelocity k2 = rhs(spec, shifted(s, k1, 0.5 * h, 0.5 * h), obj);
        const PhaseVelocity k3 = rhs(spec, shifted(s, k2, 0.5 * h, 0.5 * h), obj);
        const PhaseVelocity k4 = rhs(spec, shifted(s, k3, h, h), obj);
        PhaseState next;
        next.x1 = s.x1 + (h / 6.0) * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1);
        next.x2 = s.x2 + (h / 6.0) * (k1.dx2 + 2.0 * k2.dx2 + 2.0 * k3.dx2 + k4.dx2);
        next.t = initial.t + static_cast<double>(i + 1) * h;
        if (!detail::finite(next)) throw DivergenceError("non-finite flow state", i + 1);
        velocity_fix(next);
        if (!detail::finite(next)) throw DivergenceError("non-finite flow state", i + 1);
        s = std::move(next);
        traj.samples.push_back(detail::make_sample(s, obj, params));
    }
    return traj;
}

/// Forward Euler on ẋ = −rate·∇f(x): x_{k+1} = x_k − h·(rate·∇f(x_k)).
///
/// With h = 1 and rate = 1/L this is gradient descent iterate for iterate.
inline FlowTrajectory integrate_euler(const Objective& obj, const Vector& x0, double h,
                                      std::size_t steps, std::optional<double> rate = std::nullopt) {
    if (!(h > 0.0)) throw InvalidSpec("integration step must be > 0");
    if (steps < 1) throw InvalidSpec("integration needs at least one step");
    if (x0.size() != obj.dim()) throw InvalidSpec("initial point dimension mismatch");
    FlowSpec spec;
    spec.variant = FlowVariant::GradientFlow;
    spec.rate = rate;
    spec = resolve(spec, obj);
    const double r = *spec.rate;
    const ManifoldParams params(obj.strongly_convex() ? obj.mu() : 1.0, r);

    FlowTrajectory traj;
    traj.step = h;
    traj.spec = spec;
    traj.objective_tag = obj.tag();
    traj.samples.reserve(steps + 1);

    Vector x = x0;
    Vector g = obj.gradient(x);
    for (std::size_t i = 0;; ++i) {
        const PhaseState s(x, -r * g, static_cast<double>(i) * h);
        traj.samples.push_back(detail::make_sample(s, obj, params));
        if (i == steps) break;
        x = x - h * (r * g);
        if (!x.allFinite()) throw DivergenceError("non-finite Euler state", i + 1);
        g = obj.gradient(x);
    }
    return traj;
}

/// Initial velocity matching the first NagSC step to leading order: −(2√s/(1+√(μs)))∇f(x₀), s = 1/L.
inline Vector high_res_initial_velocity(const Objective& obj, const Vector& x0) {
    const double s = 1.0 / obj.lip();
    return -(2.0 * std::sqrt(s) / (1.0 + std::sqrt(obj.mu() * s))) * obj.gradient(x0);
}

} // namespace accel
