#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"
#include "objectives.hpp"
#include "optimizers.hpp"

namespace accel {

/// Canonical estimate φ_k(x) = φ*_k + (γ/2)‖x − v_k‖² with γ = μ, and its weight λ_k.
struct EstimationState {
    double phi_star = 0.0;
    Vector v;
    double lambda = 1.0;
    double gamma = 0.0;
    std::size_t k = 0;
};

/// Fixed mixing weight α = √(μ/L).
inline double estimation_weight(const Objective& obj) {
    if (!obj.strongly_convex()) throw Inapplicable("estimation sequences need mu > 0");
    return std::sqrt(obj.mu() / obj.lip());
}

/// φ₀(x) = f(x₀) + (μ/2)‖x − x₀‖², λ₀ = 1.
inline EstimationState init(const Objective& obj, const Vector& x0) {
    if (!obj.strongly_convex()) throw Inapplicable("estimation sequences need mu > 0");
    return {obj.value(x0), x0, 1.0, obj.mu(), 0};
}

inline double evaluate_phi(const EstimationState& s, const Vector& x, const Objective& /*obj*/) {
    return s.phi_star + 0.5 * s.gamma * (x - s.v).squaredNorm();
}

/// φ_{k+1} = (1 − α)φ_k + α[f(y) + ⟨∇f(y), x − y⟩ + (μ/2)‖x − y‖²], kept in canonical form.
///
/// Completing the square gives
///   v⁺  = (1 − α)v + αy − (α/μ)∇f(y)
///   φ*⁺ = (1 − α)φ* + αf(y) − (α²/2μ)‖∇f(y)‖² + α(1 − α)[(μ/2)‖y − v‖² + ⟨∇f(y), v − y⟩]
///   λ⁺  = (1 − α)λ
inline EstimationState update(const EstimationState& s, const Objective& obj, const Vector& y) {
    const double a = estimation_weight(obj);
    const double mu = obj.mu();
    const Vector g = obj.gradient(y);
    const double fy = obj.value(y);
    const Vector v_minus_y = s.v - y;

    EstimationState next;
    next.v = (1.0 - a) * s.v + a * y - (a / mu) * g;
    next.phi_star = (1.0 - a) * s.phi_star + a * fy - (a * a / (2.0 * mu)) * g.squaredNorm() +
                    a * (1.0 - a) * (0.5 * mu * v_minus_y.squaredNorm() + g.dot(v_minus_y));
    next.lambda = (1.0 - a) * s.lambda;
    next.gamma = mu;
    next.k = s.k + 1;
    return next;
}

/// φ*_k ≥ f(x_k) up to 1e-9·(1 + |φ*_k|).
inline bool verify_lower_bound(const EstimationState& s, const Objective& obj, const Vector& x_k) {
    return s.phi_star >= obj.value(x_k) - 1e-9 * (1.0 + std::abs(s.phi_star));
}

/// φ_k(x) ≤ (1 − λ_k)f(x) + λ_kφ₀(x) at every sample, 1e-9 relative slack.
inline bool verify_envelope(const EstimationState& s, const Objective& obj,
                            const EstimationState& phi0, std::span<const Vector> samples) {
    if (samples.empty()) throw InvalidSpec("envelope check needs at least one sample");
    for (const Vector& x : samples) {
        const double lhs = evaluate_phi(s, x, obj);
        const double rhs = (1.0 - s.lambda) * obj.value(x) + s.lambda * evaluate_phi(phi0, x, obj);
        if (!(lhs <= rhs + 1e-9 * (1.0 + std::abs(rhs)))) return false;
    }
    return true;
}

struct CoupledRun {
    Trajectory trajectory;              ///< x_k records (y_k stored in each IterState)
    std::vector<EstimationState> history; ///< φ_k for k = 0..iters
    std::vector<Vector> eliminated_y;   ///< y_k rebuilt from x only: x_k + β(x_k − x_{k−1})
};

/// Three-sequence scheme: y_k = (αv_k + x_k)/(1 + α), x_{k+1} = y_k − ∇f(y_k)/L, and v_{k+1}
/// from the estimation recursion at y_k.
///
/// Each step checks v_{k+1} = x_k + (x_{k+1} − x_k)/α (1e-9 relative) and that the look-ahead
/// rebuilt without v equals x_{k+1} + β(x_{k+1} − x_k). Violations throw ConsistencyError.
inline CoupledRun coupled_nag_run(const Objective& obj, const Vector& x0, std::size_t iters) {
    const double a = estimation_weight(obj);
    const double beta = nesterov_sc_momentum(obj);

    CoupledRun out;
    out.trajectory.objective_tag = obj.tag();
    EstimationState est = init(obj, x0);
    Vector x = x0;
    Vector y = (a * est.v + x) / (1.0 + a);

    auto record = [&](std::size_t k, const Vector& xk, const Vector& yk, const Vector& xprev) {
        const double f = obj.value(xk);
        if (!std::isfinite(f)) throw DivergenceError("non-finite coupled iterate", k);
        out.trajectory.states.push_back({k, xk, yk, xprev, 1.0});
        out.trajectory.f_values.push_back(f);
        out.trajectory.f_gaps.push_back(obj.fmin() ? f - *obj.fmin()
                                                   : std::numeric_limits<double>::quiet_NaN());
        out.trajectory.grad_norms.push_back(obj.gradient(xk).norm());
        if (out.trajectory.monotone_flag(out.trajectory.states.size() - 1))
            ++out.trajectory.monotone_violations;
    };

    record(0, x, y, x);
    out.history.push_back(est);
    out.eliminated_y.push_back(x0);

    for (std::size_t k = 0; k < iters; ++k) {
        const Vector x_next = y - obj.gradient(y) / obj.lip();
        EstimationState est_next = update(est, obj, y);

        const Vector v_from_x = x + (x_next - x) / a;
        const double v_dev = (est_next.v - v_from_x).lpNorm<Eigen::Infinity>();
        if (v_dev > 1e-9 * (1.0 + est_next.v.lpNorm<Eigen::Infinity>()))
            throw ConsistencyError("coupling identity violated at k = " + std::to_string(k));

        const Vector y_next = (a * est_next.v + x_next) / (1.0 + a);
        const Vector y_elim = x_next + beta * (x_next - x);
        if ((y_next - y_elim).lpNorm<Eigen::Infinity>() >
            1e-9 * (1.0 + y_elim.lpNorm<Eigen::Infinity>()))
            throw ConsistencyError("eliminated look-ahead disagrees at k = " + std::to_string(k));

        record(k + 1, x_next, y_next, x);
        out.history.push_back(est_next);
        out.eliminated_y.push_back(y_elim);
        x = x_next;
        y = y_next;
        est = std::move(est_next);
    }
    return out;
}

} // namespace accel
