// accel_lab: batch experiments over the accel library.
//
//   accel_lab run     --config cfg.json [--out dir] [--seed n]
//   accel_lab sweep   --config cfg.json --kappas 25,100,400
//   accel_lab compare --config cfg.json
//   accel_lab check   [--momentum-sign minus] [--counterexample-slopes 25,2,25]
//
// Exit status: 0 success, 1 validation or check failure, 2 I/O error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "accel/harness/checks.hpp"
#include "accel/harness/commands.hpp"

namespace {

using namespace accel;
using namespace accel::harness;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    std::vector<double> kappas;
    std::string momentum_sign = "plus";
    std::vector<double> slopes{25.0, 1.0, 25.0};
};

ExperimentConfig load(const Options& o) {
    ExperimentConfig cfg = parse_config_text(read_file(o.config));
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

std::filesystem::path out_dir(const Options& o, const ExperimentConfig& cfg) {
    return o.out.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(o.out);
}

int do_run(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const auto result = cmd_run(cfg, out_dir(o, cfg));
    if (!o.quiet) {
        for (const auto& m : result.summary["methods"]) {
            std::cout << m["name"].get<std::string>() << ": " << m["status"].get<std::string>();
            if (!m["final_f_gap"].is_null()) std::cout << ", final f_gap " << fmt17(m["final_f_gap"].get<double>());
            if (!m["rate_report"].is_null())
                std::cout << ", contraction " << fmt17(m["rate_report"]["fitted_contraction"].get<double>()) << " ("
                          << m["rate_report"]["verdict"].get<std::string>() << ")";
            std::cout << '\n';
        }
        std::cout << "wrote " << result.files.size() << " files to " << out_dir(o, cfg).string() << '\n';
    }
    return 0;
}

int do_sweep(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const auto rows = cmd_sweep(cfg, o.kappas, out_dir(o, cfg));
    if (!o.quiet) std::cout << sweep_csv(rows);
    return 0;
}

int do_compare(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const auto res = cmd_compare(cfg, out_dir(o, cfg));
    if (!o.quiet)
        std::cout << "delta " << fmt17(res.delta) << ", max deviation " << fmt17(res.max_deviation) << '\n';
    return 0;
}

int do_check(const Options& o) {
    CheckOptions opt;
    if (o.momentum_sign == "minus") opt.momentum_sign = MomentumSign::Minus;
    else if (o.momentum_sign != "plus") {
        std::cerr << "--momentum-sign: expected 'plus' or 'minus'\n";
        return 1;
    }
    opt.counterexample_slopes = o.slopes;
    const auto results = run_checks(opt);
    bool ok = true;
    for (const auto& r : results) ok = ok && r.passed;
    if (!o.quiet || !ok) print_check_table(std::cout, results);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accelerated first-order methods and their continuous-time limits"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", o.config, "experiment config (JSON)");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (default: config output_dir)");
        sub->add_option("--seed", o.seed, "override the config seed");
        sub->add_flag("--quiet", o.quiet, "print nothing on success");
    };
    auto* run = app.add_subcommand("run", "execute every method and flow in a config");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "rate table across condition numbers");
    add_common(sweep, true);
    sweep->add_option("--kappas", o.kappas, "condition numbers")->delimiter(',')->required();
    auto* compare = app.add_subcommand("compare", "discrete iterates against a flow");
    add_common(compare, true);
    auto* check = app.add_subcommand("check", "run the invariant suite");
    add_common(check, false);
    check->add_option("--momentum-sign", o.momentum_sign, "NagSC momentum sign used by the rate check");
    check->add_option("--counterexample-slopes", o.slopes, "slopes of the 1-D counterexample")
        ->delimiter(',')
        ->expected(3);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*run) return do_run(o);
        if (*sweep) return do_sweep(o);
        if (*compare) return do_compare(o);
        return do_check(o);
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
