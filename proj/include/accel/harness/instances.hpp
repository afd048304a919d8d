#pragma once

#include <cstdint>

#include "../objectives.hpp"

namespace accel::harness {

/// Rotated quadratic with n eigenvalues linearly spaced on [1, κ] (so μ = 1, L = κ).
inline QuadraticSpec standard_quadratic_spec(double kappa, std::size_t n = 10,
                                             std::uint64_t seed = 2024) {
    return {linspace_spectrum(kappa, n), seed, Vector()};
}

inline Objective standard_quadratic(double kappa, std::size_t n = 10, std::uint64_t seed = 2024) {
    return make_quadratic(standard_quadratic_spec(kappa, n, seed));
}

/// Reference convex instance: 10-dimensional log-sum-exp over 20 Gaussian rows and their
/// negations, unit smoothing, minimizer located by gradient descent.
inline Objective standard_log_sum_exp() {
    const Objective raw = make_seeded_log_sum_exp(10, 20, 7, 1.0);
    return locate_minimizer(raw, Vector::Zero(raw.dim()));
}

} // namespace accel::harness
