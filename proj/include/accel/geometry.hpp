#pragma once

#include <functional>
#include <utility>

#include "errors.hpp"
#include "objectives.hpp"

namespace accel {

/// A point (x₁, x₂) of phase space at time t; x₂ is the velocity of x₁.
struct PhaseState {
    Vector x1;
    Vector x2;
    double t = 0.0;

    PhaseState() = default;
    PhaseState(Vector position, Vector velocity, double time = 0.0)
        : x1(std::move(position)), x2(std::move(velocity)), t(time) {
        if (x1.size() != x2.size()) throw InvalidSpec("phase state blocks must have equal dimension");
        if (!(t >= 0.0)) throw InvalidSpec("phase state time must be >= 0");
    }
};

/// Transverse rate `alpha` and tangential weight `beta` of the invariant manifold
/// M₀ = {x₂ + β∇f(x₁) = 0}.
///
/// The storage function S = ½‖M‖² satisfies Ṡ ≤ −α̂S for α̂ = 2α; only α is exposed.
struct ManifoldParams {
    double alpha = 1.0;
    double beta = 1.0;

    ManifoldParams() = default;
    ManifoldParams(double a, double b) : alpha(a), beta(b) {
        if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidSpec("manifold rates must be > 0");
    }

    /// α = μ, β = 1/L.
    static ManifoldParams for_objective(const Objective& obj) {
        if (!obj.strongly_convex()) throw Inapplicable("default manifold params need mu > 0");
        return {obj.mu(), 1.0 / obj.lip()};
    }
};

namespace detail {
inline void require_same_dim(const PhaseState& s, const Objective& obj) {
    if (s.x1.size() != obj.dim() || s.x2.size() != obj.dim())
        throw InvalidSpec("phase state and objective dimensions differ");
}
} // namespace detail

/// M = x₂ + β∇f(x₁); zero exactly on M₀.
inline Vector residual_m0(const PhaseState& s, const Objective& obj, const ManifoldParams& p) {
    detail::require_same_dim(s, obj);
    return s.x2 + p.beta * obj.gradient(s.x1);
}

/// αx₂ + ∇f(x₁); its norm is the offset η of the perturbation manifold.
inline Vector residual_mp(const PhaseState& s, const Objective& obj, const ManifoldParams& p) {
    detail::require_same_dim(s, obj);
    return p.alpha * s.x2 + obj.gradient(s.x1);
}

/// The connection ω = β∇²f(x₁) as an operator, applied through Hessian-vector products.
class Connection {
public:
    using Map = std::function<Vector(const Vector&)>;

    explicit Connection(Map map) : map_(std::move(map)) {}

    Vector operator()(const Vector& v) const { return map_(v); }

    /// ω = w·I, handy for hand-checked scalar cases.
    static Connection scalar(double w) {
        return Connection([w](const Vector& v) -> Vector { return w * v; });
    }

private:
    Map map_;
};

inline Connection connection(const Objective& obj, const Vector& x1, const ManifoldParams& p) {
    if (x1.size() != obj.dim()) throw InvalidSpec("connection base point dimension mismatch");
    return Connection([obj, x1, beta = p.beta](const Vector& v) -> Vector {
        return beta * obj.hess_vec(x1, v);
    });
}

/// A phase-space tangent vector (ẋ₁, ẋ₂).
struct Tangent {
    Vector d1;
    Vector d2;
};

/// Degenerate form ⟨a, b⟩_R = (ωa₁ + a₂)ᵀ(ωb₁ + b₂), block matrix [[ω², ω], [ω, 1]].
/// It has no inverse, and none is offered.
class MetricR {
public:
    explicit MetricR(Connection omega) : omega_(std::move(omega)) {}

    /// The normal component ω·a₁ + a₂.
    Vector normal_part(const Tangent& a) const { return omega_(a.d1) + a.d2; }

    double operator()(const Tangent& a, const Tangent& b) const {
        return normal_part(a).dot(normal_part(b));
    }

private:
    Connection omega_;
};

inline MetricR metric_r(Connection omega) { return MetricR(std::move(omega)); }

struct TangentSplit {
    Tangent horizontal;
    Tangent vertical;
};

/// (ẋ₁, ẋ₂) = (ẋ₁, −ωẋ₁) ⊕ (0, ẋ₂ + ωẋ₁).
inline TangentSplit split_tangent(const Vector& xdot1, const Vector& xdot2, const Connection& omega) {
    if (xdot1.size() != xdot2.size()) throw InvalidSpec("tangent blocks must have equal dimension");
    const Vector w = omega(xdot1);
    return {{xdot1, -w}, {Vector::Zero(xdot1.size()), xdot2 + w}};
}

/// u = −β∇²f(x₁)x₂ − αM, the feedback that makes Ṁ = −αM along ẋ₁ = x₂.
inline Vector control_law(const PhaseState& s, const Objective& obj, const ManifoldParams& p) {
    const Vector m = residual_m0(s, obj, p);
    return -p.beta * obj.hess_vec(s.x1, s.x2) - p.alpha * m;
}

/// S = ½‖M‖².
inline double storage(const Vector& residual) { return 0.5 * residual.squaredNorm(); }

} // namespace accel
