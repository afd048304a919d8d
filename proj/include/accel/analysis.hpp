#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "flows.hpp"
#include "geometry.hpp"
#include "objectives.hpp"
#include "optimizers.hpp"

namespace accel {

/// Gaps at or below this are floating-point noise and never enter a fit.
inline constexpr double kGapFloor = 1e-14;

enum class Verdict { Pass, Fail };

struct RateReport {
    double fitted_contraction = 1.0;
    double r_squared = 0.0;
    double theoretical = 1.0;
    Verdict verdict = Verdict::Fail;
    std::size_t window_start = 0;
    std::size_t window_end = 0;
};

struct CycleReport {
    bool converged = false;
    std::optional<std::size_t> recurrence_period;
    double min_recurrence_distance = std::numeric_limits<double>::infinity();
    double gap_floor = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

/// Ordinary least squares y ≈ slope·x + intercept. Constant y gives r² = 1.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
        sse += e * e;
    }
    fit.r_squared = syy > 0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return fit;
}

/// exp of the least-squares slope of log(gap) against k over the trailing window.
inline RateReport fit_rate(std::span<const double> gaps, double window_fraction = 0.5) {
    if (gaps.size() < 20) throw InsufficientData("fit_rate needs at least 20 gaps");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw InvalidSpec("window_fraction must lie in (0, 1]");
    const std::size_t n = gaps.size();
    const auto len = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(n)));
    const std::size_t start = n - std::min(n, std::max<std::size_t>(len, 1));

    std::vector<double> ks, logs;
    for (std::size_t k = start; k < n; ++k) {
        if (std::isfinite(gaps[k]) && gaps[k] > kGapFloor) {
            ks.push_back(static_cast<double>(k));
            logs.push_back(std::log(gaps[k]));
        }
    }
    if (ks.size() < 10) throw InsufficientData("fewer than 10 usable gaps in the fit window");
    const LineFit fit = fit_line(ks, logs);
    RateReport report;
    report.fitted_contraction = std::exp(fit.slope);
    report.r_squared = fit.r_squared;
    report.window_start = static_cast<std::size_t>(ks.front());
    report.window_end = static_cast<std::size_t>(ks.back());
    return report;
}

/// Rate fit that also accepts runs which reach the gap floor before a window can be fitted.
/// In that case the contraction is (floor/gap₀)^(1/k_hit), the rate implied by hitting the
/// floor at step k_hit.
inline RateReport fit_rate_or_floor(std::span<const double> gaps, double window_fraction = 0.5) {
    try {
        return fit_rate(gaps, window_fraction);
    } catch (const InsufficientData&) {
        const auto hit = std::find_if(gaps.begin(), gaps.end(),
                                      [](double g) { return std::isfinite(g) && g <= kGapFloor; });
        if (hit == gaps.end() || hit == gaps.begin() || !(gaps.front() > kGapFloor)) throw;
        const auto k_hit = static_cast<double>(hit - gaps.begin());
        RateReport report;
        report.fitted_contraction = std::pow(kGapFloor / gaps.front(), 1.0 / k_hit);
        report.r_squared = 1.0;
        report.window_start = 0;
        report.window_end = static_cast<std::size_t>(k_hit);
        return report;
    }
}

/// Report against an arbitrary theoretical contraction with a pass threshold.
inline RateReport check_rate(std::span<const double> gaps, double theoretical, double threshold) {
    RateReport report = fit_rate_or_floor(gaps);
    report.theoretical = theoretical;
    report.verdict = report.fitted_contraction <= threshold ? Verdict::Pass : Verdict::Fail;
    return report;
}

/// Accelerated-rate check: theoretical 1 − 1/√κ, pass iff fitted ≤ 1 − 1/(2√κ).
inline RateReport check_sc_rate(const Trajectory& traj, double kappa) {
    if (!(kappa >= 1.0)) throw InvalidSpec("kappa must be >= 1");
    const double root = std::sqrt(kappa);
    return check_rate(traj.f_gaps, 1.0 - 1.0 / root, 1.0 - 1.0 / (2.0 * root));
}

/// Gradient-descent rate check: theoretical 1 − 1/κ, pass iff fitted ≤ 1 − 1/(2κ).
inline RateReport check_gd_rate(const Trajectory& traj, double kappa) {
    if (!(kappa >= 1.0)) throw InvalidSpec("kappa must be >= 1");
    return check_rate(traj.f_gaps, 1.0 - 1.0 / kappa, 1.0 - 1.0 / (2.0 * kappa));
}

/// f(x_k) − f(x*) ≤ scale · 1.01 · 2L/(k+1)² ‖x₀ − x*‖² for every k ≥ 1.
inline bool check_convex_bound(const Trajectory& traj, const Objective& obj, const Vector& x0,
                               const Vector& xstar, double scale = 1.0) {
    const double fstar = obj.value(xstar);
    const double r2 = (x0 - xstar).squaredNorm();
    for (std::size_t k = 1; k < traj.f_values.size(); ++k) {
        const double kk = static_cast<double>(k + 1);
        const double bound = scale * 1.01 * 2.0 * obj.lip() / (kk * kk) * r2;
        if (traj.f_values[k] - fstar > bound) return false;
    }
    return true;
}

namespace detail {
// Largest relative distance between points of one candidate orbit, max over the tail.
inline double orbit_spread(const Trajectory& traj, std::size_t start, std::size_t p) {
    double spread = 0.0;
    for (std::size_t k = start; k + p < traj.states.size(); ++k) {
        const Vector& xk = traj.states[k].x;
        for (std::size_t j = 1; j < p; ++j)
            spread = std::max(spread, (traj.states[k + j].x - xk).norm() / (1.0 + xk.norm()));
    }
    return spread;
}
} // namespace detail

/// Converged iff the final gap is ≤ tol. Otherwise look for the smallest period p with
/// ‖x_{k+p} − x_k‖ ≤ tol·(1 + ‖x_k‖) throughout the post-transient tail, whose orbit is
/// nontrivial (its points spread by more than tol). Slow drift and stalls never qualify.
///
/// Without known f*, the gradient norm stands in for the gap.
inline CycleReport detect_cycle(const Trajectory& traj, double transient_fraction, double tol) {
    const std::size_t n = traj.states.size();
    if (n < 100) throw InsufficientData("detect_cycle needs at least 100 states");
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw InvalidSpec("transient_fraction must lie in [0, 1)");

    const bool have_gaps = std::isfinite(traj.f_gaps.back());
    const auto& measure = have_gaps ? traj.f_gaps : traj.grad_norms;
    const auto start = static_cast<std::size_t>(transient_fraction * static_cast<double>(n));

    CycleReport report;
    report.gap_floor = *std::min_element(measure.begin() + static_cast<std::ptrdiff_t>(start), measure.end());
    if (measure.back() <= tol) {
        report.converged = true;
        report.min_recurrence_distance = 0.0;
        return report;
    }

    const std::size_t tail = n - start;
    for (std::size_t p = 1; p <= tail / 2; ++p) {
        double worst = 0.0;
        for (std::size_t k = start; k + p < n; ++k) {
            const Vector& xk = traj.states[k].x;
            const double d = (traj.states[k + p].x - xk).norm() / (1.0 + xk.norm());
            worst = std::max(worst, d);
            if (worst > report.min_recurrence_distance && worst > tol) break;
        }
        report.min_recurrence_distance = std::min(report.min_recurrence_distance, worst);
        if (worst <= tol && detail::orbit_spread(traj, start, p) > tol) {
            report.recurrence_period = p;
            break;
        }
    }
    return report;
}

namespace detail {

/// Linear interpolation of the flow position at time t.
inline Vector flow_position_at(const FlowTrajectory& flow, double t) {
    const auto& samples = flow.samples;
    const double t0 = samples.front().state.t;
    const double t1 = samples.back().state.t;
    const double slack = 1e-9 * flow.step;
    if (t < t0 - slack || t > t1 + slack)
        throw DomainError("time " + fmt_real(t) + " outside flow range [" + fmt_real(t0) + ", " +
                          fmt_real(t1) + "]");
    const double u = (t - t0) / flow.step;
    auto i = static_cast<std::size_t>(std::floor(u));
    i = std::min(i, samples.size() - 1);
    const double frac = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
    if (i + 1 >= samples.size() || frac == 0.0) return samples[i].state.x1;
    return (1.0 - frac) * samples[i].state.x1 + frac * samples[i + 1].state.x1;
}

} // namespace detail

/// maxₖ ‖x_k − x_flow(k·Δ)‖ with the flow linearly interpolated.
inline double compare_discrete_flow(const Trajectory& traj, const FlowTrajectory& flow, double delta) {
    if (traj.objective_tag != flow.objective_tag)
        throw DomainError("trajectory and flow belong to different objectives");
    if (flow.samples.empty() || traj.states.empty()) throw DomainError("empty trajectory");
    if (traj.states.front().x.size() != flow.samples.front().state.x1.size())
        throw DomainError("trajectory and flow dimensions differ");
    const double t0 = flow.samples.front().state.t;
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const Vector xf = detail::flow_position_at(flow, t0 + static_cast<double>(k) * delta);
        worst = std::max(worst, (traj.states[k].x - xf).norm());
    }
    return worst;
}

inline double compare_discrete_flow(const FlowTrajectory& flow, const Trajectory& traj, double delta) {
    return compare_discrete_flow(traj, flow, delta);
}

/// Per-k deviations ‖x_k − x_flow(k·Δ)‖.
inline std::vector<double> discrete_flow_deviations(const Trajectory& traj, const FlowTrajectory& flow,
                                                    double delta) {
    if (traj.objective_tag != flow.objective_tag)
        throw DomainError("trajectory and flow belong to different objectives");
    const double t0 = flow.samples.front().state.t;
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        out.push_back((traj.states[k].x -
                       detail::flow_position_at(flow, t0 + static_cast<double>(k) * delta))
                          .norm());
    return out;
}

/// α / (β·μ): transverse rate over the slowest tangential rate β·μ.
inline double spectral_gap(const Objective& obj, const ManifoldParams& p) {
    if (!obj.strongly_convex()) throw Inapplicable("spectral gap is undefined for mu = 0");
    return p.alpha / (p.beta * obj.mu());
}

/// Count of k with gap(k+1) > gap(k) + 1e-14 (f values when f* is unknown).
inline std::size_t monotonicity_report(const Trajectory& traj) {
    const bool have_gaps = !traj.f_gaps.empty() && std::isfinite(traj.f_gaps.front());
    const auto& seq = have_gaps ? traj.f_gaps : traj.f_values;
    std::size_t count = 0;
    for (std::size_t k = 1; k < seq.size(); ++k)
        if (seq[k] > seq[k - 1] + 1e-14) ++count;
    return count;
}

/// Least-squares slope of log‖M(t)‖ over samples with ‖M‖ above `floor`.
inline LineFit fit_residual_decay(const FlowTrajectory& flow, double floor = 1e-12) {
    std::vector<double> ts, logs;
    for (const auto& s : flow.samples) {
        if (s.m0_residual_norm > floor) {
            ts.push_back(s.state.t);
            logs.push_back(std::log(s.m0_residual_norm));
        }
    }
    if (ts.size() < 10) throw InsufficientData("too few residual samples above the floor");
    return fit_line(ts, logs);
}

} // namespace accel
