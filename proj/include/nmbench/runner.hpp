// runner.hpp — Runs scenarios through the propagators and measures and
// writes self-describing CSV files.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nmbench/scenario.hpp"
#include "nmbench/tc2.hpp"

namespace nmbench {

struct RunOptions {
    std::filesystem::path out_dir{"out"};
    // Also run the TC2 history-convolution oracle and compare.
    bool oracle{false};
    // Overrides the methods of every scenario when non-empty.
    std::vector<Method> methods;
    // Worker threads over scenario points.
    int jobs{1};
};

inline constexpr double oracle_tolerance = 1e-4;

struct PointResult {
    std::string scenario;
    Method method{Method::tc2};
    ModelParams model;
    bool ok{true};
    std::string status{"ok"};
    bool has_nm{false};
    NmReport nm;
    double nm_half_horizon{std::numeric_limits<double>::quiet_NaN()};
    double oracle_delta{std::numeric_limits<double>::quiet_NaN()};
};

struct ScenarioResult {
    std::vector<PointResult> points;
    std::vector<std::filesystem::path> files;

    bool ok() const {
        return std::all_of(points.begin(), points.end(), [](const PointResult& p) { return p.ok; });
    }
};

namespace detail {

inline std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

inline std::string safe_name(const std::string& name) {
    std::string out = name;
    for (auto& ch : out) {
        const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_';
        if (!keep) ch = '_';
    }
    return out;
}

inline void write_metadata(std::ostream& os, const Scenario& s, const Problem& problem, Method method,
                           const HeomOptions& heom) {
    const auto& m = s.model;
    os << "# generator: nmbench\n";
    os << "# scenario: " << s.name << "\n";
    os << "# method: " << method_name(method) << "\n";
    os << "# omega0_cm: " << fmt("%.10g", m.omega0) << "\n";
    os << "# J_cm: " << fmt("%.10g", m.j_coupling) << "\n";
    os << "# lambda_cm: " << fmt("%.10g", m.lambda) << "\n";
    os << "# gamma_cm: " << fmt("%.10g", m.gamma) << "\n";
    os << "# gamma_inverse_fs: " << fmt("%.6g", units::inverse_rate_fs(m.gamma)) << "\n";
    os << "# temperature_K: " << fmt("%.10g", m.temperature) << "\n";
    os << "# t_final_fs: " << fmt("%.10g", m.t_final) << "\n";
    os << "# dt_fs: " << fmt("%.10g", m.dt) << "\n";
    os << "# initial_state: " << s.initial_state_label() << "\n";
    os << "# matsubara_k: " << problem.series.n_matsubara << "\n";
    os << "# tail_correction: " << (s.tail_correction ? "true" : "false") << "\n";
    os << "# tail_delta_rad_per_fs: " << fmt("%.12e", problem.series.tail_delta) << "\n";
    os << "# residual_bound: " << fmt("%.6e", problem.series.residual_bound) << "\n";
    os << "# relative_residual: " << fmt("%.6e", problem.series.relative_residual()) << "\n";
    if (method == Method::heom) {
        os << "# heom_depth: " << heom.max_depth << "\n";
        os << "# heom_matsubara: " << heom.matsubara_terms << "\n";
    }
    os << "# rise_threshold: " << fmt("%.6e", s.rise_threshold) << "\n";
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t_fs,re_rho_pp,im_rho_pp,re_rho_pm,im_rho_pm,re_rho_mp,im_rho_mp,re_rho_mm,im_rho_mm,rho_pp,abs_rho_mp\n";
    char line[512];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& r = traj.states[i];
        std::snprintf(line, sizeof line,
                      "%.10g,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", traj.times[i],
                      r(0, 0).real(), r(0, 0).imag(), r(0, 1).real(), r(0, 1).imag(), r(1, 0).real(),
                      r(1, 0).imag(), r(1, 1).real(), r(1, 1).imag(), r(0, 0).real(), std::abs(r(1, 0)));
        os << line;
    }
}

// Full round-trip precision so nm_value can be recomputed from the file.
inline void write_concurrence_csv(std::ostream& os, const NmReport& report) {
    os << "t_fs,concurrence\n";
    char line[96];
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        std::snprintf(line, sizeof line, "%.10g,%.17g\n", report.times[i], report.concurrence[i]);
        os << line;
    }
}

inline NmReport truncated_report(const NmReport& full, double horizon) {
    std::vector<double> t, c;
    for (std::size_t i = 0; i < full.times.size() && full.times[i] <= horizon + 1e-9; ++i) {
        t.push_back(full.times[i]);
        c.push_back(full.concurrence[i]);
    }
    if (t.size() < 2) return full;
    return non_markovianity(t, c, full.rise_threshold);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

} // namespace detail

inline ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options = {}) {
    namespace fs = std::filesystem;
    scenario.validate();
    ScenarioResult result;
    const fs::path dir = options.out_dir / detail::safe_name(scenario.name);
    fs::create_directories(dir);

    const auto& methods = options.methods.empty() ? scenario.methods : options.methods;
    std::optional<Problem> problem;
    try {
        problem = make_problem(scenario.model, scenario.bath());
    } catch (const std::exception& e) {
        for (Method m : methods) {
            PointResult p;
            p.scenario = scenario.name;
            p.method = m;
            p.model = scenario.model;
            p.ok = false;
            p.status = std::string("failed: ") + e.what();
            result.points.push_back(p);
        }
        return result;
    }

    if (scenario.outputs.bath_audit) {
        const auto path = dir / "bath_series.csv";
        auto os = detail::open_output(path);
        detail::write_metadata(os, scenario, *problem, Method::tc2, scenario.heom());
        write_series_csv(os, problem->series);
        result.files.push_back(path);
    }

    for (Method method : methods) {
        PointResult point;
        point.scenario = scenario.name;
        point.method = method;
        point.model = scenario.model;
        try {
            SolverSettings settings;
            settings.heom = scenario.heom();
            if (settings.heom.matsubara_terms < 0) settings.heom.matsubara_terms = problem->series.n_matsubara;
            const std::string tag(method_name(method));

            std::optional<ChoiImages> images;
            if (scenario.outputs.needs_choi()) images = choi_images(method, *problem, settings);

            if (scenario.outputs.needs_trajectory() || options.oracle) {
                const Trajectory traj = (images && !scenario.initial_state)
                                            ? (*images)[0][0]
                                            : propagate(method, *problem, scenario.rho0(), settings);
                if (scenario.outputs.needs_trajectory()) {
                    const auto path = dir / ("trajectory_" + tag + ".csv");
                    auto os = detail::open_output(path);
                    detail::write_metadata(os, scenario, *problem, method, settings.heom);
                    detail::write_trajectory_csv(os, traj);
                    result.files.push_back(path);
                }
                if (options.oracle && method == Method::tc2) {
                    const auto oracle = propagate_tc2_history_oracle(scenario.model, scenario.rho0());
                    point.oracle_delta = max_abs_difference(traj, oracle);
                    const auto path = dir / "trajectory_TC2_oracle.csv";
                    auto os = detail::open_output(path);
                    detail::write_metadata(os, scenario, *problem, method, settings.heom);
                    os << "# oracle: history convolution, dt/10\n";
                    detail::write_trajectory_csv(os, oracle);
                    result.files.push_back(path);
                    if (!(point.oracle_delta <= oracle_tolerance)) {
                        point.ok = false;
                        point.status = "oracle-mismatch: max-abs " + detail::fmt("%.3e", point.oracle_delta);
                    }
                }
            }

            if (images) {
                point.nm = non_markovianity(assemble_choi(*images), scenario.rise_threshold);
                point.has_nm = true;
                point.nm_half_horizon = detail::truncated_report(point.nm, 0.5 * scenario.model.t_final).nm_value;
                const auto path = dir / ("concurrence_" + tag + ".csv");
                auto os = detail::open_output(path);
                detail::write_metadata(os, scenario, *problem, method, settings.heom);
                detail::write_concurrence_csv(os, point.nm);
                result.files.push_back(path);
            }
        } catch (const std::exception& e) {
            point.ok = false;
            point.status = std::string("failed: ") + e.what();
        }
        result.points.push_back(point);
    }
    return result;
}

inline void write_summary(std::ostream& os, const std::vector<PointResult>& rows) {
    os << "# generator: nmbench\n";
    os << "# nm_value: total variation minus net drop of the system-ancilla concurrence over [0, t_final]\n";
    os << "# nm_value_half_horizon: the same over [0, t_final/2]\n";
    os << "method,lambda_cm,gamma_cm,omega0_cm,J_cm,T_K,nm_value,max_concurrence_revival,"
          "scenario,nm_value_half_horizon,min_choi_eigenvalue,oracle_max_abs_delta,status\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        const auto& m = r.model;
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        os << method_name(r.method) << ',' << detail::fmt("%.10g", m.lambda) << ','
           << detail::fmt("%.10g", m.gamma) << ',' << detail::fmt("%.10g", m.omega0) << ','
           << detail::fmt("%.10g", m.j_coupling) << ',' << detail::fmt("%.10g", m.temperature) << ','
           << detail::fmt("%.17g", r.has_nm ? r.nm.nm_value : nan) << ','
           << detail::fmt("%.17g", r.has_nm ? r.nm.max_revival : nan) << ',' << r.scenario << ','
           << detail::fmt("%.17g", r.has_nm ? r.nm_half_horizon : nan) << ','
           << detail::fmt("%.6e", r.has_nm ? r.nm.min_choi_eigenvalue : nan) << ','
           << detail::fmt("%.6e", r.oracle_delta) << ',' << status << '\n';
    }
}

struct RunSummary {
    std::vector<PointResult> rows;
    std::filesystem::path summary_path;

    bool ok() const {
        return std::all_of(rows.begin(), rows.end(), [](const PointResult& p) { return p.ok; });
    }
};

// Runs every scenario (points fan out over `jobs` workers; each scenario
// writes to its own directory) and writes summary.csv in scenario order.
inline RunSummary run_scenarios(const std::vector<Scenario>& scenarios, const RunOptions& options = {}) {
    check_unique_names(scenarios);
    std::filesystem::create_directories(options.out_dir);
    std::vector<ScenarioResult> results(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) results[i] = run_scenario(scenarios[i], options);
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(scenarios.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    RunSummary summary;
    for (const auto& r : results) summary.rows.insert(summary.rows.end(), r.points.begin(), r.points.end());
    summary.summary_path = options.out_dir / "summary.csv";
    auto os = detail::open_output(summary.summary_path);
    write_summary(os, summary.rows);
    return summary;
}

} // namespace nmbench
