#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "../analysis.hpp"
#include "../estimation.hpp"
#include "../flows.hpp"
#include "../geometry.hpp"
#include "../optimizers.hpp"
#include "../rng.hpp"
#include "instances.hpp"
#include "io.hpp"

namespace accel::harness {

struct CheckOptions {
    MomentumSign momentum_sign = MomentumSign::Plus;
    std::vector<double> counterexample_slopes{25.0, 1.0, 25.0};
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace checks {

inline CheckResult gradient_oracles(const Objective& obj, const std::string& name, std::uint64_t seed,
                                    const std::function<Vector(Rng&)>& sample) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, check_gradient(obj, sample(rng), 1e-6));
    return {name, worst <= 1e-5, "max relative deviation " + fmt17(worst)};
}

inline CheckResult counterexample_continuity(const CheckOptions& opt) {
    const Objective obj = make_counterexample_1d(opt.counterexample_slopes);
    const double jump = obj.model_as<PiecewiseGradient1DFunction>()->max_gradient_jump();
    return {"counterexample_gradient_continuity", jump <= 1e-12, "max jump " + fmt17(jump)};
}

inline CheckResult geometry_split(std::uint64_t seed) {
    const Objective obj = standard_quadratic(100.0, 6, 5);
    const ManifoldParams p(1.0, 0.01);
    Rng rng(seed);
    double recon = 0.0, ortho = 0.0, normal = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vector x1 = rng.normal_vector(obj.dim());
        const Vector d1 = rng.normal_vector(obj.dim());
        const Vector d2 = rng.normal_vector(obj.dim());
        const Connection omega = connection(obj, x1, p);
        const TangentSplit split = split_tangent(d1, d2, omega);
        recon = std::max({recon, (split.horizontal.d1 + split.vertical.d1 - d1).lpNorm<Eigen::Infinity>(),
                          (split.horizontal.d2 + split.vertical.d2 - d2).lpNorm<Eigen::Infinity>()});
        const MetricR metric = metric_r(omega);
        ortho = std::max(ortho, std::abs(metric(split.horizontal, split.vertical)));
        normal = std::max(normal, metric.normal_part(split.horizontal).lpNorm<Eigen::Infinity>());
    }
    return {"geometry_split_orthogonality", recon <= 1e-12 && ortho <= 1e-10 && normal <= 1e-10,
            "reconstruction " + fmt17(recon) + ", R-orthogonality " + fmt17(ortho) +
                ", normal annihilation " + fmt17(normal)};
}

inline CheckResult estimation_certificate(std::uint64_t seed) {
    const Objective obj = standard_quadratic(100.0);
    Rng rng(seed);
    const Vector x0 = rng.on_sphere(obj.dim(), 5.0);
    const CoupledRun run = coupled_nag_run(obj, x0, 200);
    const double a = estimation_weight(obj);
    bool lower = true, envelope = true;
    double lambda_dev = 0.0;
    std::vector<Vector> samples;
    for (int i = 0; i < 50; ++i) samples.push_back(rng.on_sphere(obj.dim(), 5.0 * rng.uniform()));
    for (std::size_t k = 0; k < run.history.size(); ++k) {
        const auto& est = run.history[k];
        lower = lower && verify_lower_bound(est, obj, run.trajectory.states[k].x);
        envelope = envelope && verify_envelope(est, obj, run.history.front(), samples);
        lambda_dev = std::max(lambda_dev, std::abs(est.lambda - std::pow(1.0 - a, static_cast<double>(k))));
    }
    return {"estimation_certificate", lower && envelope && lambda_dev <= 1e-12,
            std::string("lower bound ") + (lower ? "ok" : "VIOLATED") + ", envelope " +
                (envelope ? "ok" : "VIOLATED") + ", lambda deviation " + fmt17(lambda_dev)};
}

inline CheckResult gd_equals_euler(std::uint64_t seed) {
    const Objective obj = standard_quadratic(10.0);
    Rng rng(seed);
    const Vector x0 = rng.on_sphere(obj.dim(), 3.0);
    const Trajectory gd = run({MethodVariant::GD}, obj, x0, 100, 0.0);
    const FlowTrajectory euler = integrate_euler(obj, x0, 1.0, 100);
    double dev = 0.0;
    for (std::size_t k = 0; k < gd.states.size(); ++k)
        dev = std::max(dev, (gd.states[k].x - euler.samples[k].state.x1).lpNorm<Eigen::Infinity>());
    return {"gd_equals_euler", dev <= 1e-13, "max deviation " + fmt17(dev)};
}

inline CheckResult nag_sc_rate(const CheckOptions& opt, std::uint64_t seed) {
    const Objective obj = standard_quadratic(100.0);
    Rng rng(seed);
    const Vector x0 = rng.on_sphere(obj.dim(), 1.0);
    MethodSpec m{MethodVariant::NagSC};
    m.sign = opt.momentum_sign;
    const Trajectory traj = run(m, obj, x0, 300, 0.0);
    const RateReport rep = check_sc_rate(traj, 100.0);
    return {"nag_sc_accelerated_rate", rep.verdict == Verdict::Pass,
            "fitted " + fmt17(rep.fitted_contraction) + " vs threshold " + fmt17(1.0 - 1.0 / 20.0)};
}

inline CheckResult heavy_ball_cycle() {
    const Objective obj = make_counterexample_1d();
    const Trajectory traj = run({MethodVariant::HeavyBall}, obj, Vector::Constant(1, 1.001), 1500, 0.0);
    const CycleReport rep = detect_cycle(traj, 0.5, 1e-6);
    const bool ok = !rep.converged && rep.recurrence_period && rep.gap_floor > 1e-2;
    return {"heavy_ball_counterexample_cycle", ok,
            "period " + (rep.recurrence_period ? std::to_string(*rep.recurrence_period) : std::string("none")) +
                ", gap floor " + fmt17(rep.gap_floor)};
}

inline CheckResult manifold_contraction(std::uint64_t seed) {
    const Objective obj = standard_quadratic(25.0, 6);
    const ManifoldParams p(2.0, 1.0 / obj.lip());
    Rng rng(seed);
    const PhaseState s0(rng.normal_vector(obj.dim()), rng.normal_vector(obj.dim()));
    const FlowTrajectory ft =
        integrate({FlowVariant::ControlledNaim}, obj, s0, default_flow_step(obj), 2000, p);
    const double slope = fit_residual_decay(ft).slope;
    const double rel = std::abs(slope + p.alpha) / p.alpha;
    return {"controlled_naim_contraction", rel <= 0.01, "slope " + fmt17(slope) + " vs " + fmt17(-p.alpha)};
}

} // namespace checks

/// Invariant suite behind `check`. Every entry runs even if an earlier one fails.
inline std::vector<CheckResult> run_checks(const CheckOptions& opt = {}) {
    std::vector<std::function<CheckResult()>> suite = {
        [] {
            const Objective q = standard_quadratic(100.0, 8, 11);
            return checks::gradient_oracles(q, "gradient_oracle_quadratic", 1,
                                            [&](Rng& r) { return r.on_sphere(q.dim(), 1.0 + 4.0 * r.uniform()); });
        },
        [] {
            const Objective lse = standard_log_sum_exp();
            return checks::gradient_oracles(lse, "gradient_oracle_log_sum_exp", 2,
                                            [&](Rng& r) { return r.on_sphere(lse.dim(), 3.0 * r.uniform() + 0.1); });
        },
        [&opt] {
            const Objective ce = make_counterexample_1d(opt.counterexample_slopes);
            // Stay clear of the breakpoints so differences see one segment.
            return checks::gradient_oracles(ce, "gradient_oracle_counterexample", 3, [](Rng& r) {
                const double segment = std::floor(3.0 * r.uniform());
                return Vector::Constant(1, segment + 0.01 + 0.98 * r.uniform());
            });
        },
        [&opt] { return checks::counterexample_continuity(opt); },
        [] { return checks::geometry_split(4); },
        [] { return checks::estimation_certificate(5); },
        [] { return checks::gd_equals_euler(6); },
        [&opt] { return checks::nag_sc_rate(opt, 7); },
        [] { return checks::heavy_ball_cycle(); },
        [] { return checks::manifold_contraction(8); },
    };
    std::vector<CheckResult> results;
    for (std::size_t i = 0; i < suite.size(); ++i) {
        try {
            results.push_back(suite[i]());
        } catch (const std::exception& e) {
            results.push_back({"check #" + std::to_string(i + 1), false, std::string("error: ") + e.what()});
        }
    }
    return results;
}

inline void print_check_table(std::ostream& os, const std::vector<CheckResult>& results) {
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results)
        os << r.name << std::string(width - r.name.size() + 2, ' ') << (r.passed ? "PASS  " : "FAIL  ")
           << r.detail << '\n';
}

} // namespace accel::harness
