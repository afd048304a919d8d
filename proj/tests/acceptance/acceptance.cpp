// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime budgets are pinned here.
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "accel/accel.hpp"
#include "accel/harness/checks.hpp"
#include "accel/harness/instances.hpp"

using namespace accel;

namespace {

// Six significant digits for the report lines.
std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, r.ptr);
}

struct Outcome {
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> body;
};

// Frozen regression bound for NagSC vs HighResSC on the κ=25 instance, in units of √s‖x₀‖.
// Measured worst case over seeds 1..20 was 1.3786.
constexpr double kTrackingConstant = 1.5;

Outcome gd_equals_euler() {
    const Objective f = harness::standard_quadratic(10.0);
    Rng rng(101);
    const Vector x0 = rng.on_sphere(f.dim(), 3.0);
    const Trajectory gd = run({MethodVariant::GD}, f, x0, 100, 0.0);
    const FlowTrajectory eu = integrate_euler(f, x0, 1.0, 100);
    double dev = 0.0;
    for (std::size_t k = 0; k < gd.states.size(); ++k)
        dev = std::max(dev, (gd.states[k].x - eu.samples[k].state.x1).lpNorm<Eigen::Infinity>());
    return {gd.states.size() == 101 && dev <= 1e-13, "max componentwise deviation " + num(dev)};
}

Outcome acceleration_order() {
    bool ok = true;
    std::string detail;
    double ratio = 0.0;
    for (double kappa : {25.0, 100.0, 400.0}) {
        const Objective f = harness::standard_quadratic(kappa);
        Rng rng(102);
        const Vector x0 = rng.on_sphere(f.dim(), 1.0);
        const Trajectory nag = run({MethodVariant::NagSC}, f, x0, 300, 0.0);
        const Trajectory gd = run({MethodVariant::GD}, f, x0, 300, 0.0);
        const double fit_nag = fit_rate_or_floor(nag.f_gaps).fitted_contraction;
        const double fit_gd = fit_rate_or_floor(gd.f_gaps).fitted_contraction;
        const double nag_limit = 1.0 - 1.0 / (2.0 * std::sqrt(kappa));
        const double gd_limit = 1.0 - 3.0 / kappa;
        ok = ok && fit_nag <= nag_limit && fit_gd >= gd_limit;
        detail += "kappa=" + num(kappa) + ": nag " + num(fit_nag) + " (<= " + num(nag_limit) + "), gd " +
                  num(fit_gd) + " (>= " + num(gd_limit) + "), ";
        if (kappa == 100.0) ratio = gd.f_gaps[300] / std::max(nag.f_gaps[300], 1e-300);
    }
    ok = ok && ratio >= 1e3;
    return {ok, detail + "gap ratio at k=300, kappa=100: " + num(ratio)};
}

Outcome convex_bound() {
    const Objective f = harness::standard_log_sum_exp();
    const Vector& xstar = *f.minimizer();
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(103 + seed);
        const Vector x0 = xstar + rng.on_sphere(f.dim(), 3.0);
        const Trajectory traj = run({MethodVariant::NagC}, f, x0, 1000, 0.0);
        ok = ok && traj.steps() == 1000 && check_convex_bound(traj, f, x0, xstar);
    }
    return {ok, "NagC within 1.01 x 2L/(k+1)^2 |x0-x*|^2 for k in [1, 1000], 5 starts"};
}

Outcome estimation_certificate() {
    const Objective f = harness::standard_quadratic(100.0);
    Rng rng(110);
    const Vector x0 = rng.on_sphere(f.dim(), 4.0);
    const CoupledRun cr = coupled_nag_run(f, x0, 200);
    const double a = estimation_weight(f);
    bool lower = true, envelope = true;
    double lambda_dev = 0.0;
    for (std::size_t k = 0; k < cr.history.size(); ++k) {
        std::vector<Vector> samples;
        for (int i = 0; i < 50; ++i) samples.push_back(rng.on_sphere(f.dim(), 6.0 * rng.uniform()));
        lower = lower && verify_lower_bound(cr.history[k], f, cr.trajectory.states[k].x);
        envelope = envelope && verify_envelope(cr.history[k], f, cr.history.front(), samples);
        lambda_dev = std::max(lambda_dev, std::abs(cr.history[k].lambda - std::pow(1.0 - a, static_cast<double>(k))));
    }
    const Trajectory nag = run({MethodVariant::NagSC}, f, x0, 200, 0.0);
    double elim = 0.0;
    for (std::size_t k = 0; k < nag.states.size(); ++k)
        elim = std::max(elim, (cr.trajectory.states[k].x - nag.states[k].x).lpNorm<Eigen::Infinity>());
    const bool ok = cr.history.size() == 201 && lower && envelope && lambda_dev <= 1e-12 && elim <= 1e-12;
    return {ok, std::string("lower bound ") + (lower ? "ok" : "violated") + ", envelope " +
                    (envelope ? "ok" : "violated") + ", lambda dev " + num(lambda_dev) + ", elimination dev " +
                    num(elim)};
}

Outcome manifold_contraction() {
    const Objective f = harness::standard_quadratic(25.0, 6);
    const ManifoldParams p(2.0, 1.0 / f.lip());
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(200 + seed);
        const PhaseState s0(rng.normal_vector(f.dim()), rng.normal_vector(f.dim()));
        const FlowTrajectory ft = integrate({FlowVariant::ControlledNaim}, f, s0, default_flow_step(f), 2000, p);
        worst = std::max(worst, std::abs(fit_residual_decay(ft).slope + p.alpha) / p.alpha);
    }
    return {worst <= 0.01, "worst relative slope error " + num(worst) + " over 20 starts (alpha 2)"};
}

Outcome geometry_invariants() {
    const Objective f = harness::standard_log_sum_exp();
    const ManifoldParams p(1.0, 1.0 / f.lip());
    Rng rng(300);
    double recon = 0.0, ortho = 0.0, normal = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vector x1 = rng.on_sphere(f.dim(), 3.0 * rng.uniform());
        const Vector d1 = rng.normal_vector(f.dim()), d2 = rng.normal_vector(f.dim());
        const Connection omega = connection(f, x1, p);
        const TangentSplit sp = split_tangent(d1, d2, omega);
        recon = std::max({recon, (sp.horizontal.d1 + sp.vertical.d1 - d1).lpNorm<Eigen::Infinity>(),
                          (sp.horizontal.d2 + sp.vertical.d2 - d2).lpNorm<Eigen::Infinity>()});
        const MetricR r = metric_r(omega);
        ortho = std::max(ortho, std::abs(r(sp.horizontal, sp.vertical)));
        normal = std::max(normal, r.normal_part(sp.horizontal).lpNorm<Eigen::Infinity>());
    }
    return {recon <= 1e-12 && ortho <= 1e-10 && normal <= 1e-10,
            "reconstruction " + num(recon) + ", R-orthogonality " + num(ortho) + ", normal " + num(normal)};
}

Outcome heavy_ball_failure() {
    const Objective f = make_counterexample_1d();
    bool ok = true;
    std::string detail;
    for (double start : {3.3, 1.001}) {
        const Vector x0 = Vector::Constant(1, start);
        const Trajectory hb = run({MethodVariant::HeavyBall}, f, x0, 1500, 0.0);
        const CycleReport rep = detect_cycle(hb, 0.5, 1e-6);
        const Trajectory nag = run({MethodVariant::NagSC}, f, x0, 1500, 0.0);
        ok = ok && !rep.converged && rep.gap_floor > 1e-2 && rep.recurrence_period.has_value() &&
             nag.f_gaps.back() <= 1e-9;
        detail += "x0=" + num(start) + ": period " +
                  (rep.recurrence_period ? std::to_string(*rep.recurrence_period) : std::string("none")) +
                  ", floor " + num(rep.gap_floor) + ", nag gap " + num(nag.f_gaps.back()) + "; ";
    }
    return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome non_monotonicity() {
    // Stiffest mode that NagSC does not annihilate in one step.
    const auto spec = harness::standard_quadratic_spec(500.0);
    const Objective f = make_quadratic(spec);
    const Vector x0 = quadratic_eigenvector(spec, spec.eigenvalues.size() - 2);
    const std::size_t nag = monotonicity_report(run({MethodVariant::NagSC}, f, x0, 300, 0.0));
    const std::size_t gd = monotonicity_report(run({MethodVariant::GD}, f, x0, 300, 0.0));
    return {nag >= 1 && gd == 0, "NagSC violations " + std::to_string(nag) + ", GD violations " + std::to_string(gd)};
}

Outcome high_res_tracking() {
    const Objective f = harness::standard_quadratic(25.0);
    const double s = 1.0 / f.lip(), delta = std::sqrt(s), h = default_flow_step(f);
    const auto steps = static_cast<std::size_t>(std::ceil(100.0 * delta / h));
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const Vector x0 = rng.on_sphere(f.dim(), 1.0);
        const Trajectory nag = run({MethodVariant::NagSC}, f, x0, 100, 0.0);
        const FlowTrajectory flow =
            integrate({FlowVariant::HighResSC}, f, PhaseState(x0, high_res_initial_velocity(f, x0)), h, steps, {});
        worst = std::max(worst, compare_discrete_flow(nag, flow, delta) / (delta * x0.norm()));
    }
    return {worst <= kTrackingConstant,
            "worst deviation / (sqrt(s)|x0|) " + num(worst) + " vs frozen " + num(kTrackingConstant)};
}

Outcome oracle_hygiene() {
    struct Case {
        Objective f;
        std::function<Vector(Rng&)> sample;
    };
    const Objective q = harness::standard_quadratic(100.0);
    const Objective lse = harness::standard_log_sum_exp();
    const Objective ce = make_counterexample_1d();
    std::vector<Case> cases{
        {q, [&](Rng& r) { return r.on_sphere(q.dim(), 5.0 * r.uniform()); }},
        {lse, [&](Rng& r) { return r.on_sphere(lse.dim(), 5.0 * r.uniform()); }},
        {ce, [](Rng& r) { return Vector::Constant(1, std::floor(3.0 * r.uniform()) + 0.01 + 0.98 * r.uniform()); }},
    };
    double worst = 0.0;
    Rng rng(400);
    for (const auto& c : cases)
        for (int i = 0; i < 200; ++i) worst = std::max(worst, check_gradient(c.f, c.sample(rng), 1e-6));
    const auto results = harness::run_checks();
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    return {worst <= 1e-5 && failed == 0, "worst fd deviation " + num(worst) + ", check suite " +
                                              std::to_string(results.size() - failed) + "/" +
                                              std::to_string(results.size()) + " passed"};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "gd_equals_forward_euler", 1.0, gd_equals_euler},
        {2, "acceleration_order", 5.0, acceleration_order},
        {3, "nag_convex_bound", 5.0, convex_bound},
        {4, "estimation_certificate", 5.0, estimation_certificate},
        {5, "manifold_contraction", 5.0, manifold_contraction},
        {6, "geometry_invariants", 1.0, geometry_invariants},
        {7, "heavy_ball_failure", 2.0, heavy_ball_failure},
        {8, "non_monotonicity", 1.0, non_monotonicity},
        {9, "high_res_tracking", 10.0, high_res_tracking},
        {10, "oracle_hygiene", 60.0, oracle_hygiene},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = out.ok && secs < c.budget_s;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << "  " << out.detail << "  ("
                  << num(secs) << " s, budget " << c.budget_s << " s)\n";
    }
    return failures == 0 ? 0 : 1;
}
