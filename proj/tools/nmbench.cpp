// nmbench: command-line driver for scenario runs, bath audits and HEOM
// convergence checks.
//
// Exit codes: 0 success, 1 at least one point failed, 2 configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmbench/nmbench.hpp"

namespace {

using namespace nmbench;

constexpr int exit_point_failure = 1;
constexpr int exit_config_error = 2;

struct Selection {
    std::string scenario_path;
    std::string preset_name;
    std::vector<std::string> only;
};

void add_selection(CLI::App* cmd, Selection& sel) {
    auto* scenario = cmd->add_option("--scenario", sel.scenario_path, "Scenario file (JSON)");
    auto* preset_opt = cmd->add_option("--preset", sel.preset_name, "Preset: fig1, fig3, fig4, fig5, smoke");
    scenario->excludes(preset_opt);
    cmd->add_option("--only", sel.only, "Restrict to the named scenarios")->delimiter(',');
}

std::vector<Scenario> select(const Selection& sel) {
    std::vector<Scenario> scenarios;
    if (!sel.scenario_path.empty()) {
        auto set = load_scenarios(sel.scenario_path);
        for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
        scenarios = std::move(set.scenarios);
    } else if (!sel.preset_name.empty()) {
        scenarios = preset(sel.preset_name);
    } else {
        throw ConfigError("one of --scenario or --preset is required");
    }
    if (!sel.only.empty()) {
        std::vector<Scenario> kept;
        for (const auto& name : sel.only) {
            auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                   [&](const Scenario& s) { return s.name == name; });
            if (it == scenarios.end()) throw ConfigError("--only: no scenario named '" + name + "'");
            kept.push_back(*it);
        }
        scenarios = std::move(kept);
    }
    return scenarios;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& n : names) {
        const auto m = parse_method(n);
        if (!m) throw ConfigError("--methods: unknown method '" + n + "' (valid: TC2, TL2, HEOM)");
        if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
    return out;
}

std::string default_out_dir() {
    const char* env = std::getenv("NMBENCH_OUT");
    return env && *env ? env : "out";
}

int cmd_run(const Selection& sel, const std::string& out, const std::vector<std::string>& methods, bool oracle,
            int jobs) {
    if (jobs < 1) throw ConfigError("--jobs: must satisfy jobs >= 1");
    RunOptions opts;
    opts.out_dir = out;
    opts.methods = parse_methods(methods);
    opts.oracle = oracle;
    opts.jobs = jobs;
    const auto scenarios = select(sel);
    if (scenarios.empty()) {
        std::cerr << "warning: no scenarios to run\n";
        return 0;
    }
    for (const auto& s : scenarios) std::printf("scenario %s: gamma^-1 = %.1f fs\n", s.name.c_str(),
                                                units::inverse_rate_fs(s.model.gamma));
    const auto summary = run_scenarios(scenarios, opts);
    for (const auto& r : summary.rows) {
        std::printf("%-28s %-4s nm=%.6e revival=%.6e %s\n", r.scenario.c_str(),
                    std::string(method_name(r.method)).c_str(), r.has_nm ? r.nm.nm_value : 0.0,
                    r.has_nm ? r.nm.max_revival : 0.0, r.status.c_str());
    }
    std::printf("summary: %s\n", summary.summary_path.string().c_str());
    return summary.ok() ? 0 : exit_point_failure;
}

int cmd_audit(const Selection& sel, const std::string& out, int matsubara, double target) {
    const auto scenarios = select(sel);
    bool ok = true;
    std::printf("%-28s %4s %14s %14s %14s %8s\n", "scenario", "K", "residual", "relative", "tail_delta", "status");
    for (const auto& s : scenarios) {
        const auto sd = SpectralDensity::from(s.model);
        const int k = matsubara >= 0 ? matsubara : s.matsubara_k;
        const auto series = k >= 0 ? matsubara_decompose(sd, s.model.temperature, k)
                                   : converged_matsubara_series(sd, s.model.temperature, target);
        const bool pass = s.model.lambda == 0.0 || series.relative_residual() <= target;
        ok = ok && pass;
        std::printf("%-28s %4d %14.6e %14.6e %14.6e %8s\n", s.name.c_str(), series.n_matsubara,
                    series.residual_bound, series.relative_residual(), series.tail_delta, pass ? "ok" : "FAIL");
        if (!out.empty()) {
            const auto dir = std::filesystem::path(out) / s.name;
            std::filesystem::create_directories(dir);
            std::ofstream os(dir / "bath_series.csv");
            os << "# scenario: " << s.name << "\n";
            os << "# residual_bound: " << series.residual_bound << "\n";
            os << "# relative_residual: " << series.relative_residual() << "\n";
            os << "# tail_delta_rad_per_fs: " << series.tail_delta << "\n";
            write_series_csv(os, series);
        }
    }
    return ok ? 0 : exit_point_failure;
}

int cmd_converge(const Selection& sel, const std::string& out, std::vector<int> depths, std::vector<int> ks) {
    const auto scenarios = select(sel);
    bool ok = true;
    std::printf("%-28s %5s %3s %14s %14s %8s\n", "scenario", "depth", "K", "depth_delta", "K_delta", "status");
    for (const auto& s : scenarios) {
        const auto problem = make_problem(s.model, s.bath());
        const auto cert = certify_heom_settings(problem, s.rho0(), s.heom());
        ok = ok && cert.passed;
        std::printf("%-28s %5d %3d %14.6e %14.6e %8s\n", s.name.c_str(), cert.settings.max_depth,
                    cert.settings.matsubara_terms, cert.depth_delta, cert.matsubara_delta,
                    cert.passed ? "ok" : "FAIL");
        if (!out.empty()) {
            const auto dir = std::filesystem::path(out) / s.name;
            std::filesystem::create_directories(dir);
            std::ofstream os(dir / "heom_convergence.csv");
            os << "# scenario: " << s.name << "\n";
            os << "# frozen_depth: " << cert.settings.max_depth << "\n";
            os << "# frozen_matsubara: " << cert.settings.matsubara_terms << "\n";
            os << "# depth_delta: " << cert.depth_delta << "\n";
            os << "# matsubara_delta: " << cert.matsubara_delta << "\n";
            if (!depths.empty() || !ks.empty()) {
                if (depths.empty()) depths = {cert.settings.max_depth};
                if (ks.empty()) ks = {cert.settings.matsubara_terms};
                write_convergence_csv(os, convergence_scan(s.model, s.rho0(), depths, ks));
            }
        }
    }
    return ok ? 0 : exit_point_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimer spin-boson dynamics: TC2, TL2 and HEOM with entanglement-based non-Markovianity"};
    app.require_subcommand(1);

    Selection run_sel, audit_sel, conv_sel;
    std::string run_out = default_out_dir(), audit_out, conv_out;
    std::vector<std::string> methods;
    bool oracle = false;
    int jobs = 1;
    int audit_k = -1;
    double audit_target = default_relative_residual;
    std::vector<int> depths, ks;

    auto* run = app.add_subcommand("run", "Propagate scenarios and write trajectories, concurrence and summary");
    add_selection(run, run_sel);
    run->add_option("--out", run_out, "Output directory (default $NMBENCH_OUT or ./out)");
    run->add_option("--methods", methods, "Comma-separated subset of TC2,TL2,HEOM")->delimiter(',');
    run->add_flag("--oracle", oracle, "Cross-check TC2 against the history-convolution oracle");
    run->add_option("--jobs", jobs, "Worker threads over scenario points");

    auto* audit = app.add_subcommand("audit-bath", "Audit the Matsubara series against the quadrature");
    add_selection(audit, audit_sel);
    audit->add_option("--out", audit_out, "Write bath_series.csv per scenario here");
    audit->add_option("--matsubara", audit_k, "Fixed Matsubara count (default: smallest passing K)");
    audit->add_option("--target", audit_target, "Relative residual target");

    auto* conv = app.add_subcommand("heom-converge", "Certify the frozen HEOM depth and Matsubara count");
    add_selection(conv, conv_sel);
    conv->add_option("--out", conv_out, "Write heom_convergence.csv per scenario here");
    conv->add_option("--depths", depths, "Optional depth sweep")->delimiter(',');
    conv->add_option("--matsubara", ks, "Optional Matsubara sweep")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config_error;
    }

    try {
        if (run->parsed()) return cmd_run(run_sel, run_out, methods, oracle, jobs);
        if (audit->parsed()) return cmd_audit(audit_sel, audit_out, audit_k, audit_target);
        if (conv->parsed()) return cmd_converge(conv_sel, conv_out, depths, ks);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const PoleProximityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_point_failure;
    }
    return exit_config_error;
}
