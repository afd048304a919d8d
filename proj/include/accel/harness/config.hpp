#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../flows.hpp"
#include "../geometry.hpp"
#include "../objectives.hpp"
#include "../optimizers.hpp"
#include "../rng.hpp"

namespace accel::harness {

using nlohmann::json;

/// Config rejected; `errors` lists every offending field as "path: reason".
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out = "invalid config:";
        for (const auto& e : errors) out += "\n  " + e;
        return out;
    }
    std::vector<std::string> errors_;
};

struct LogSumExpSpec {
    Matrix rows;
    Vector shifts;
    double smoothing = 1.0;
};

struct CounterexampleSpec {};

using ObjectiveSpec =
    std::variant<QuadraticSpec, LogSumExpSpec, PiecewiseGradient1DSpec, CounterexampleSpec>;

enum class Integrator { RK4, Euler };
enum class InitialVelocity { Rest, HighRes };

struct MethodEntry {
    std::string name;
    bool is_flow = false;
    MethodSpec method;       ///< discrete entries
    bool estimation = false; ///< NagSC only: also run the coupled estimation sequence
    FlowSpec flow;           ///< flow entries
    Integrator integrator = Integrator::RK4;
    std::optional<double> h;
    std::optional<std::size_t> steps;
    InitialVelocity initial_velocity = InitialVelocity::Rest;
};

struct X0Spec {
    std::optional<Vector> explicit_point;
    double sphere_radius = 1.0;
};

struct Budgets {
    std::size_t max_iters = 300;
    double grad_tol = 0.0;
    std::size_t flow_steps = 1000;
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    std::vector<MethodEntry> methods;
    X0Spec x0;
    Budgets budgets;
    std::optional<ManifoldParams> manifold;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

namespace detail {

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& why) { errors.push_back(path + ": " + why); }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void only(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key)) fail(path + "." + key, "unknown field");
    }

    std::optional<double> real(const json& j, const std::string& key, const std::string& path,
                               bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return std::nullopt;
        }
        if (!j[key].is_number()) {
            fail(path + "." + key, "expected a number");
            return std::nullopt;
        }
        return j[key].get<double>();
    }

    std::optional<std::uint64_t> uint(const json& j, const std::string& key, const std::string& path,
                                      bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return std::nullopt;
        }
        if (!j[key].is_number_integer() || j[key].get<std::int64_t>() < 0) {
            fail(path + "." + key, "expected a non-negative integer");
            return std::nullopt;
        }
        return j[key].get<std::uint64_t>();
    }

    std::optional<std::string> text(const json& j, const std::string& key, const std::string& path,
                                    bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return std::nullopt;
        }
        if (!j[key].is_string()) {
            fail(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return j[key].get<std::string>();
    }

    std::optional<std::vector<double>> reals(const json& j, const std::string& key,
                                             const std::string& path, bool required) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing");
            return std::nullopt;
        }
        const json& a = j[key];
        if (!a.is_array()) {
            fail(path + "." + key, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& v : a) {
            if (!v.is_number()) {
                fail(path + "." + key, "expected an array of numbers");
                return std::nullopt;
            }
            out.push_back(v.get<double>());
        }
        return out;
    }
};

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline ObjectiveSpec parse_objective(Reader& r, const json& j) {
    const std::string path = "objective";
    if (!r.object(j, path)) return CounterexampleSpec{};
    const auto type = r.text(j, "type", path, true);
    if (!type) return CounterexampleSpec{};

    if (*type == "quadratic") {
        r.only(j, path, {"type", "eigenvalues", "rotation_seed", "offset"});
        QuadraticSpec spec;
        if (auto ev = r.reals(j, "eigenvalues", path, true)) {
            spec.eigenvalues = *ev;
            if (ev->empty()) r.fail(path + ".eigenvalues", "must be non-empty");
            for (double v : *ev)
                if (!(v > 0.0)) {
                    r.fail(path + ".eigenvalues", "all eigenvalues must be > 0");
                    break;
                }
        }
        spec.rotation_seed = r.uint(j, "rotation_seed", path, false).value_or(0);
        if (auto off = r.reals(j, "offset", path, false)) {
            spec.offset = to_vector(*off);
            if (!off->empty() && off->size() != spec.eigenvalues.size())
                r.fail(path + ".offset", "length must match eigenvalues");
        }
        return spec;
    }
    if (*type == "log_sum_exp") {
        r.only(j, path, {"type", "rows", "shifts", "smoothing"});
        LogSumExpSpec spec;
        if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].size() < 2) {
            r.fail(path + ".rows", "expected an array of at least two equal-length rows");
        } else {
            const auto& rows = j["rows"];
            std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
            bool ok = cols > 0;
            for (const auto& row : rows) {
                if (!row.is_array() || row.size() != cols) ok = false;
                else
                    for (const auto& v : row) ok = ok && v.is_number();
            }
            if (!ok) {
                r.fail(path + ".rows", "expected an array of at least two equal-length rows");
            } else {
                spec.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
                for (std::size_t i = 0; i < rows.size(); ++i)
                    for (std::size_t c = 0; c < cols; ++c)
                        spec.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                            rows[i][c].get<double>();
            }
        }
        if (auto shifts = r.reals(j, "shifts", path, true)) {
            spec.shifts = to_vector(*shifts);
            if (spec.rows.rows() > 0 && spec.shifts.size() != spec.rows.rows())
                r.fail(path + ".shifts", "length must match the number of rows");
        }
        if (auto s = r.real(j, "smoothing", path, true)) {
            spec.smoothing = *s;
            if (!(*s > 0.0)) r.fail(path + ".smoothing", "must be > 0");
        }
        return spec;
    }
    if (*type == "piecewise_1d") {
        r.only(j, path, {"type", "breakpoints", "slopes", "intercepts"});
        PiecewiseGradient1DSpec spec;
        spec.breakpoints = r.reals(j, "breakpoints", path, true).value_or(std::vector<double>{});
        spec.slopes = r.reals(j, "slopes", path, true).value_or(std::vector<double>{});
        spec.intercepts = r.reals(j, "intercepts", path, false);
        if (spec.slopes.size() != spec.breakpoints.size() + 1)
            r.fail(path + ".slopes", "need exactly one more slope than breakpoints");
        for (double v : spec.slopes)
            if (!(v > 0.0)) {
                r.fail(path + ".slopes", "all slopes must be > 0");
                break;
            }
        for (std::size_t i = 1; i < spec.breakpoints.size(); ++i)
            if (!(spec.breakpoints[i] > spec.breakpoints[i - 1])) {
                r.fail(path + ".breakpoints", "must be strictly increasing");
                break;
            }
        if (spec.intercepts && spec.intercepts->size() != spec.slopes.size())
            r.fail(path + ".intercepts", "length must match slopes");
        return spec;
    }
    if (*type == "counterexample_1d") {
        r.only(j, path, {"type"});
        return CounterexampleSpec{};
    }
    r.fail(path + ".type", "unknown objective type '" + *type + "'");
    return CounterexampleSpec{};
}

inline MethodEntry parse_method(Reader& r, const json& j, const std::string& path) {
    MethodEntry m;
    if (!r.object(j, path)) return m;
    const auto kind = r.text(j, "kind", path, true).value_or("");
    const auto variant = r.text(j, "variant", path, true).value_or("");
    m.name = r.text(j, "name", path, false).value_or(variant);
    if (kind == "discrete") {
        r.only(j, path, {"kind", "variant", "name", "step", "beta", "nu", "momentum_sign", "estimation"});
        if (auto v = parse_method_variant(variant)) m.method.variant = *v;
        else if (!variant.empty()) r.fail(path + ".variant", "unknown discrete method '" + variant + "'");
        m.method.step = r.real(j, "step", path, false);
        m.method.beta = r.real(j, "beta", path, false);
        m.method.nu = r.real(j, "nu", path, false);
        if (m.method.step && !(*m.method.step > 0.0)) r.fail(path + ".step", "must be > 0");
        if (auto sign = r.text(j, "momentum_sign", path, false)) {
            if (*sign == "plus") m.method.sign = MomentumSign::Plus;
            else if (*sign == "minus") m.method.sign = MomentumSign::Minus;
            else r.fail(path + ".momentum_sign", "expected 'plus' or 'minus'");
        }
        if (j.contains("estimation")) {
            if (!j["estimation"].is_boolean()) r.fail(path + ".estimation", "expected a boolean");
            else m.estimation = j["estimation"].get<bool>();
            if (m.estimation && m.method.variant != MethodVariant::NagSC)
                r.fail(path + ".estimation", "only NagSC carries an estimation sequence");
        }
    } else if (kind == "flow") {
        m.is_flow = true;
        r.only(j, path, {"kind", "variant", "name", "alpha", "beta", "gamma", "rate", "t0", "h", "steps",
                         "integrator", "initial_velocity"});
        if (auto v = parse_flow_variant(variant)) m.flow.variant = *v;
        else if (!variant.empty()) r.fail(path + ".variant", "unknown flow '" + variant + "'");
        for (auto [key, slot] : {std::pair{"alpha", &m.flow.alpha}, std::pair{"beta", &m.flow.beta},
                                 std::pair{"gamma", &m.flow.gamma}, std::pair{"rate", &m.flow.rate},
                                 std::pair{"t0", &m.flow.t0}}) {
            *slot = r.real(j, key, path, false);
            if (*slot && !(**slot > 0.0)) r.fail(path + "." + key, "must be > 0");
        }
        m.h = r.real(j, "h", path, false);
        if (m.h && !(*m.h > 0.0)) r.fail(path + ".h", "must be > 0");
        if (auto steps = r.uint(j, "steps", path, false)) {
            if (*steps < 1) r.fail(path + ".steps", "must be >= 1");
            m.steps = static_cast<std::size_t>(*steps);
        }
        if (auto integ = r.text(j, "integrator", path, false)) {
            if (*integ == "rk4") m.integrator = Integrator::RK4;
            else if (*integ == "euler") m.integrator = Integrator::Euler;
            else r.fail(path + ".integrator", "expected 'rk4' or 'euler'");
        }
        if (m.integrator == Integrator::Euler && m.flow.variant != FlowVariant::GradientFlow)
            r.fail(path + ".integrator", "euler is only available for GradientFlow");
        if (auto iv = r.text(j, "initial_velocity", path, false)) {
            if (*iv == "rest") m.initial_velocity = InitialVelocity::Rest;
            else if (*iv == "high_res") m.initial_velocity = InitialVelocity::HighRes;
            else r.fail(path + ".initial_velocity", "expected 'rest' or 'high_res'");
        }
    } else if (!kind.empty()) {
        r.fail(path + ".kind", "expected 'discrete' or 'flow'");
    }
    return m;
}

} // namespace detail

/// Parse and validate a config document. Unknown fields anywhere are rejected.
inline ExperimentConfig parse_config(const json& j) {
    detail::Reader r;
    ExperimentConfig cfg;
    if (!r.object(j, "config")) throw ValidationError(r.errors);
    r.only(j, "config", {"version", "objective", "methods", "x0", "budgets", "manifold", "output_dir", "seed"});

    if (!j.contains("version")) r.fail("config.version", "missing (must be 1)");
    else if (!(j["version"].is_number_integer() && j["version"].get<long long>() == 1))
        r.fail("config.version", "must be 1");

    if (j.contains("objective")) cfg.objective = detail::parse_objective(r, j["objective"]);
    else r.fail("config.objective", "missing");

    if (!j.contains("methods") || !j["methods"].is_array()) {
        r.fail("config.methods", "expected an array");
    } else {
        if (j["methods"].empty()) r.fail("config.methods", "at least one method is required");
        std::set<std::string> names;
        for (std::size_t i = 0; i < j["methods"].size(); ++i) {
            const std::string path = "config.methods[" + std::to_string(i) + "]";
            auto m = detail::parse_method(r, j["methods"][i], path);
            if (!m.name.empty() && !names.insert(m.name).second)
                r.fail(path + ".name", "duplicate method name '" + m.name + "'");
            if (m.name.find_first_of("/\\ ") != std::string::npos)
                r.fail(path + ".name", "must not contain spaces or path separators");
            cfg.methods.push_back(std::move(m));
        }
    }

    if (j.contains("x0")) {
        const json& x = j["x0"];
        if (r.object(x, "config.x0")) {
            r.only(x, "config.x0", {"explicit", "sphere_radius"});
            if (x.contains("explicit") == x.contains("sphere_radius"))
                r.fail("config.x0", "give exactly one of 'explicit' or 'sphere_radius'");
            if (auto e = r.reals(x, "explicit", "config.x0", false)) cfg.x0.explicit_point = detail::to_vector(*e);
            if (auto rad = r.real(x, "sphere_radius", "config.x0", false)) {
                cfg.x0.sphere_radius = *rad;
                if (!(*rad > 0.0)) r.fail("config.x0.sphere_radius", "must be > 0");
            }
        }
    }

    if (j.contains("budgets")) {
        const json& b = j["budgets"];
        if (r.object(b, "config.budgets")) {
            r.only(b, "config.budgets", {"max_iters", "grad_tol", "flow_steps"});
            if (auto v = r.uint(b, "max_iters", "config.budgets", false)) {
                if (*v < 1) r.fail("config.budgets.max_iters", "must be >= 1");
                cfg.budgets.max_iters = static_cast<std::size_t>(*v);
            }
            if (auto v = r.real(b, "grad_tol", "config.budgets", false)) {
                if (!(*v >= 0.0)) r.fail("config.budgets.grad_tol", "must be >= 0");
                cfg.budgets.grad_tol = *v;
            }
            if (auto v = r.uint(b, "flow_steps", "config.budgets", false)) {
                if (*v < 1) r.fail("config.budgets.flow_steps", "must be >= 1");
                cfg.budgets.flow_steps = static_cast<std::size_t>(*v);
            }
        }
    }

    if (j.contains("manifold")) {
        const json& m = j["manifold"];
        if (r.object(m, "config.manifold")) {
            r.only(m, "config.manifold", {"alpha", "beta"});
            auto a = r.real(m, "alpha", "config.manifold", true);
            auto b = r.real(m, "beta", "config.manifold", true);
            if (a && b) {
                if (*a > 0.0 && *b > 0.0) cfg.manifold = ManifoldParams(*a, *b);
                else r.fail("config.manifold", "alpha and beta must be > 0");
            }
        }
    }

    if (auto dir = r.text(j, "output_dir", "config", false)) cfg.output_dir = *dir;
    cfg.seed = r.uint(j, "seed", "config", false).value_or(0);

    if (!r.errors.empty()) throw ValidationError(r.errors);
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("config: not valid JSON (") + e.what() + ")"});
    }
    return parse_config(j);
}

/// Canonical form: every field explicit, keys sorted by the JSON library.
inline json serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["version"] = 1;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;

    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            json o;
            if constexpr (std::is_same_v<T, QuadraticSpec>) {
                o = {{"type", "quadratic"}, {"eigenvalues", spec.eigenvalues},
                     {"rotation_seed", spec.rotation_seed}, {"offset", detail::to_std(spec.offset)}};
            } else if constexpr (std::is_same_v<T, LogSumExpSpec>) {
                json rows = json::array();
                for (Eigen::Index i = 0; i < spec.rows.rows(); ++i)
                    rows.push_back(detail::to_std(spec.rows.row(i).transpose()));
                o = {{"type", "log_sum_exp"}, {"rows", rows}, {"shifts", detail::to_std(spec.shifts)},
                     {"smoothing", spec.smoothing}};
            } else if constexpr (std::is_same_v<T, PiecewiseGradient1DSpec>) {
                o = {{"type", "piecewise_1d"}, {"breakpoints", spec.breakpoints}, {"slopes", spec.slopes}};
                if (spec.intercepts) o["intercepts"] = *spec.intercepts;
            } else {
                o = {{"type", "counterexample_1d"}};
            }
            j["objective"] = o;
        },
        cfg.objective);

    json methods = json::array();
    for (const auto& m : cfg.methods) {
        json e;
        e["name"] = m.name;
        if (m.is_flow) {
            e["kind"] = "flow";
            e["variant"] = std::string(to_string(m.flow.variant));
            for (auto [key, slot] : {std::pair{"alpha", &m.flow.alpha}, std::pair{"beta", &m.flow.beta},
                                     std::pair{"gamma", &m.flow.gamma}, std::pair{"rate", &m.flow.rate},
                                     std::pair{"t0", &m.flow.t0}})
                if (*slot) e[key] = **slot;
            if (m.h) e["h"] = *m.h;
            if (m.steps) e["steps"] = *m.steps;
            e["integrator"] = m.integrator == Integrator::RK4 ? "rk4" : "euler";
            e["initial_velocity"] = m.initial_velocity == InitialVelocity::Rest ? "rest" : "high_res";
        } else {
            e["kind"] = "discrete";
            e["variant"] = std::string(to_string(m.method.variant));
            if (m.method.step) e["step"] = *m.method.step;
            if (m.method.beta) e["beta"] = *m.method.beta;
            if (m.method.nu) e["nu"] = *m.method.nu;
            e["momentum_sign"] = m.method.sign == MomentumSign::Plus ? "plus" : "minus";
            e["estimation"] = m.estimation;
        }
        methods.push_back(e);
    }
    j["methods"] = methods;

    if (cfg.x0.explicit_point) j["x0"] = {{"explicit", detail::to_std(*cfg.x0.explicit_point)}};
    else j["x0"] = {{"sphere_radius", cfg.x0.sphere_radius}};
    j["budgets"] = {{"max_iters", cfg.budgets.max_iters},
                    {"grad_tol", cfg.budgets.grad_tol},
                    {"flow_steps", cfg.budgets.flow_steps}};
    if (cfg.manifold) j["manifold"] = {{"alpha", cfg.manifold->alpha}, {"beta", cfg.manifold->beta}};
    return j;
}

/// Canonical bytes: compact dump of the canonical form, sorted keys, trailing LF.
inline std::string canonical_text(const ExperimentConfig& cfg) { return serialize_config(cfg).dump() + "\n"; }

/// Build the objective. Instances without an analytic minimizer get one located numerically.
inline Objective build_objective(const ObjectiveSpec& spec) {
    return std::visit(
        [](const auto& s) -> Objective {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, QuadraticSpec>) {
                return make_quadratic(s);
            } else if constexpr (std::is_same_v<T, LogSumExpSpec>) {
                const Objective raw = make_log_sum_exp(s.rows, s.shifts, s.smoothing);
                return locate_minimizer(raw, Vector::Zero(raw.dim()));
            } else if constexpr (std::is_same_v<T, PiecewiseGradient1DSpec>) {
                return make_piecewise_1d(s);
            } else {
                return make_counterexample_1d();
            }
        },
        spec);
}

/// Explicit point, or a seeded uniform point on the sphere of the configured radius around
/// the minimizer (around the origin when none is known).
inline Vector resolve_x0(const ExperimentConfig& cfg, const Objective& obj) {
    if (cfg.x0.explicit_point) {
        if (cfg.x0.explicit_point->size() != obj.dim())
            throw ValidationError({"config.x0.explicit: length " + std::to_string(cfg.x0.explicit_point->size()) +
                                   " does not match objective dimension " + std::to_string(obj.dim())});
        return *cfg.x0.explicit_point;
    }
    Rng rng(cfg.seed);
    const Vector center = obj.minimizer().value_or(Vector::Zero(obj.dim()));
    return center + rng.on_sphere(obj.dim(), cfg.x0.sphere_radius);
}

} // namespace accel::harness
