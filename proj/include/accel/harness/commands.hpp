#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "../analysis.hpp"
#include "../estimation.hpp"
#include "../flows.hpp"
#include "../optimizers.hpp"
#include "config.hpp"
#include "io.hpp"

namespace accel::harness {

struct ExperimentResult {
    json summary;
    std::vector<std::filesystem::path> files;
};

namespace detail {

inline json objective_json(const Objective& obj) {
    json j = {{"tag", obj.tag()}, {"dim", obj.dim()}, {"mu", obj.mu()}, {"lip", obj.lip()}};
    j["fmin"] = obj.fmin() ? json(*obj.fmin()) : json();
    return j;
}

inline ManifoldParams manifold_for(const ExperimentConfig& cfg, const Objective& obj) {
    if (cfg.manifold) return *cfg.manifold;
    return {obj.strongly_convex() ? obj.mu() : 1.0, 1.0 / obj.lip()};
}

inline std::string file_stem(std::size_t index, const std::string& name) {
    return (index < 10 ? "0" : "") + std::to_string(index) + "_" + name;
}

/// Rate report for a discrete run, or the reason there is none.
inline json rate_json(const MethodSpec& method, const Trajectory& traj, const Objective& obj) {
    if (!obj.strongly_convex() || !obj.fmin()) return json();
    const double kappa = condition_number(obj);
    try {
        return to_json(method.variant == MethodVariant::GD ? check_gd_rate(traj, kappa)
                                                           : check_sc_rate(traj, kappa));
    } catch (const InsufficientData&) {
        return json();
    }
}

struct FlowPlan {
    PhaseState initial;
    double h;
    std::size_t steps;
};

inline FlowPlan plan_flow(const MethodEntry& m, const Objective& obj, const Vector& x0,
                          std::size_t default_steps) {
    FlowPlan plan;
    plan.h = m.h.value_or(m.integrator == Integrator::Euler ? 1.0 : default_flow_step(obj));
    plan.steps = m.steps.value_or(default_steps);
    double t0 = 0.0;
    if (m.flow.variant == FlowVariant::HighResConvex) t0 = *resolve(m.flow, obj).t0;
    Vector v0 = m.initial_velocity == InitialVelocity::HighRes ? high_res_initial_velocity(obj, x0)
                                                                : Vector::Zero(x0.size());
    plan.initial = PhaseState(x0, std::move(v0), t0);
    return plan;
}

inline FlowTrajectory run_flow(const MethodEntry& m, const Objective& obj, const FlowPlan& plan,
                               const ManifoldParams& params) {
    if (m.integrator == Integrator::Euler)
        return integrate_euler(obj, plan.initial.x1, plan.h, plan.steps, m.flow.rate);
    return integrate(m.flow, obj, plan.initial, plan.h, plan.steps, params);
}

inline json base_summary(const std::string& command, const ExperimentConfig& cfg, const Objective& obj) {
    return {{"version", 1},
            {"command", command},
            {"library_version", std::string(kLibraryVersion)},
            {"config_hash", sha256_hex(canonical_text(cfg))},
            {"seed", cfg.seed},
            {"objective", objective_json(obj)}};
}

inline void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& out,
                           ExperimentResult& result) {
    const auto path = out / "config.canonical.json";
    write_file(path, canonical_text(cfg));
    result.files.push_back(path);
}

} // namespace detail

/// Execute every method and flow, one CSV per trajectory, then summary.json (renamed into place).
/// Divergence is recorded per method and the run continues.
inline ExperimentResult cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const Objective obj = build_objective(cfg.objective);
    const Vector x0 = resolve_x0(cfg, obj);
    const ManifoldParams params = detail::manifold_for(cfg, obj);
    ensure_dir(out);

    ExperimentResult result;
    detail::write_manifest(cfg, out, result);
    json summary = detail::base_summary("run", cfg, obj);
    json entries = json::array();

    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
        const MethodEntry& m = cfg.methods[i];
        const std::string stem = detail::file_stem(i, m.name);
        json e = {{"name", m.name}, {"kind", m.is_flow ? "flow" : "discrete"}};
        e["variant"] = std::string(m.is_flow ? to_string(m.flow.variant) : to_string(m.method.variant));
        e["status"] = "ok";
        e["diverged_at_step"] = json();
        e["csv"] = json();
        e["estimation_csv"] = json();
        e["rate_report"] = json();
        e["cycle_report"] = json();
        e["final_f_gap"] = json();
        e["error"] = json();
        try {
            std::string csv;
            if (m.is_flow) {
                const auto plan = detail::plan_flow(m, obj, x0, cfg.budgets.flow_steps);
                const FlowTrajectory flow = detail::run_flow(m, obj, plan, params);
                csv = flow_csv(flow);
                e["samples"] = flow.samples.size();
                e["final_f_gap"] = flow.samples.back().f_gap;
            } else {
                const Trajectory traj = run(m.method, obj, x0, cfg.budgets.max_iters, cfg.budgets.grad_tol);
                csv = discrete_csv(traj);
                e["iterations"] = traj.steps();
                e["final_f_gap"] = traj.f_gaps.back();
                e["monotone_violations"] = traj.monotone_violations;
                e["rate_report"] = detail::rate_json(m.method, traj, obj);
                if (traj.states.size() >= 100) e["cycle_report"] = to_json(detect_cycle(traj, 0.5, 1e-6));
                if (m.estimation) {
                    const auto coupled = coupled_nag_run(obj, x0, cfg.budgets.max_iters);
                    const auto path = out / (stem + "_estimation.csv");
                    write_file(path, estimation_csv(coupled));
                    result.files.push_back(path);
                    e["estimation_csv"] = path.filename().string();
                }
            }
            const auto path = out / (stem + ".csv");
            write_file(path, csv);
            result.files.push_back(path);
            e["csv"] = path.filename().string();
        } catch (const DivergenceError& err) {
            e["status"] = "diverged";
            e["diverged_at_step"] = err.step();
            e["error"] = err.what();
        } catch (const Inapplicable& err) {
            e["status"] = "inapplicable";
            e["error"] = err.what();
        }
        entries.push_back(e);
    }
    summary["methods"] = entries;
    const auto path = out / "summary.json";
    write_file_atomic(path, summary.dump(2) + "\n");
    result.files.push_back(path);
    result.summary = std::move(summary);
    return result;
}

struct SweepRow {
    double kappa;
    std::string method;
    double fitted_contraction;
    double theoretical;
    bool pass;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "kappa,method,fitted_contraction,theoretical,pass\n";
    for (const auto& r : rows)
        out += fmt17(r.kappa) + ',' + r.method + ',' + fmt17(r.fitted_contraction) + ',' +
               fmt17(r.theoretical) + ',' + (r.pass ? "1" : "0") + '\n';
    return out;
}

/// Rate table over κ for the discrete methods of a quadratic config. For each κ the spectrum is
/// replaced by n values linearly spaced on [1, κ] (n from the config); flows are skipped.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& kappas,
                                       const std::filesystem::path& out) {
    const auto* base = std::get_if<QuadraticSpec>(&cfg.objective);
    if (!base) throw ValidationError({"config.objective.type: sweep needs a quadratic objective"});
    if (kappas.empty()) throw ValidationError({"kappas: at least one value is required"});
    for (double k : kappas)
        if (!(k >= 1.0)) throw ValidationError({"kappas: every value must be >= 1"});

    std::vector<SweepRow> rows;
    for (double kappa : kappas) {
        QuadraticSpec spec = *base;
        spec.eigenvalues = linspace_spectrum(kappa, base->eigenvalues.size());
        const Objective obj = make_quadratic(spec);
        const Vector x0 = resolve_x0(cfg, obj);
        for (const auto& m : cfg.methods) {
            if (m.is_flow) continue;
            SweepRow row{kappa, m.name, std::nan(""), 1.0, false};
            const bool gd = m.method.variant == MethodVariant::GD;
            row.theoretical = gd ? 1.0 - 1.0 / kappa : 1.0 - 1.0 / std::sqrt(kappa);
            try {
                const Trajectory traj = run(m.method, obj, x0, cfg.budgets.max_iters, cfg.budgets.grad_tol);
                const RateReport rep = gd ? check_gd_rate(traj, kappa) : check_sc_rate(traj, kappa);
                row.fitted_contraction = rep.fitted_contraction;
                row.pass = rep.verdict == Verdict::Pass;
            } catch (const DivergenceError&) {
            } catch (const InsufficientData&) {
            }
            rows.push_back(row);
        }
    }
    ensure_dir(out);
    write_file(out / "sweep.csv", sweep_csv(rows));
    return rows;
}

struct CompareResult {
    double max_deviation = 0.0;
    double delta = 0.0;
    std::vector<double> deviations;
};

/// Pair the first discrete method with the first flow and sample the flow at t_k = k·Δ.
/// Δ is the Euler step for an Euler-integrated gradient flow and √(1/L) otherwise.
inline CompareResult cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const MethodEntry* discrete = nullptr;
    const MethodEntry* flow = nullptr;
    for (const auto& m : cfg.methods) {
        if (m.is_flow && !flow) flow = &m;
        if (!m.is_flow && !discrete) discrete = &m;
    }
    std::vector<std::string> errors;
    if (!discrete) errors.push_back("config.methods: compare needs a discrete method");
    if (!flow) errors.push_back("config.methods: compare needs a flow");
    if (!errors.empty()) throw ValidationError(errors);

    const Objective obj = build_objective(cfg.objective);
    const Vector x0 = resolve_x0(cfg, obj);
    const ManifoldParams params = detail::manifold_for(cfg, obj);

    const Trajectory traj = run(discrete->method, obj, x0, cfg.budgets.max_iters, cfg.budgets.grad_tol);
    auto plan = detail::plan_flow(*flow, obj, x0, cfg.budgets.flow_steps);
    const double delta = flow->integrator == Integrator::Euler ? plan.h : 1.0 / std::sqrt(obj.lip());
    const double horizon = static_cast<double>(traj.steps()) * delta;
    plan.steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / plan.h - 1e-9)));
    const FlowTrajectory ft = detail::run_flow(*flow, obj, plan, params);

    CompareResult res;
    res.delta = delta;
    res.deviations = discrete_flow_deviations(traj, ft, delta);
    for (double d : res.deviations) res.max_deviation = std::max(res.max_deviation, d);

    ensure_dir(out);
    std::string csv = "k,t,deviation\n";
    for (std::size_t k = 0; k < res.deviations.size(); ++k)
        csv += std::to_string(k) + ',' + fmt17(static_cast<double>(k) * delta) + ',' +
               fmt17(res.deviations[k]) + '\n';
    write_file(out / "compare.csv", csv);
    write_file(out / "config.canonical.json", canonical_text(cfg));
    json summary = detail::base_summary("compare", cfg, obj);
    summary["discrete"] = discrete->name;
    summary["flow"] = flow->name;
    summary["delta"] = delta;
    summary["max_deviation"] = res.max_deviation;
    write_file_atomic(out / "compare.json", summary.dump(2) + "\n");
    return res;
}

} // namespace accel::harness
