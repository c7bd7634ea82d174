// scenario.hpp — Scenario configuration: JSON schema, validation and the
// figure presets.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmbench/errors.hpp"
#include "nmbench/heom.hpp"
#include "nmbench/measures.hpp"
#include "nmbench/model.hpp"
#include "nmbench/propagate.hpp"

namespace nmbench {

struct OutputFlags {
    bool populations{true};
    bool coherence{true};
    bool concurrence{true};
    bool nm{true};
    bool bath_audit{false};

    bool needs_choi() const { return concurrence || nm; }
    bool needs_trajectory() const { return populations || coherence; }
};

struct Scenario {
    std::string name;
    ModelParams model;
    std::vector<Method> methods{Method::tc2, Method::tl2, Method::heom};
    // Hierarchy depth and explicit Matsubara count for HEOM; negative values
    // take the frozen heom_settings for the model.
    int heom_depth{-1};
    int heom_matsubara{-1};
    // Matsubara count for TC2/TL2; negative selects the audited default.
    int matsubara_k{-1};
    bool tail_correction{true};
    // Empty selects |chi_+><chi_+|.
    std::optional<DensityMatrix2> initial_state;
    OutputFlags outputs;
    double rise_threshold{default_rise_threshold};

    DensityMatrix2 rho0() const { return initial_state ? *initial_state : exciton_plus_state(); }
    std::string initial_state_label() const { return initial_state ? "custom" : "exciton_plus"; }

    BathOptions bath() const { return {matsubara_k, tail_correction}; }

    HeomOptions heom() const {
        HeomOptions opts = heom_settings(model);
        if (heom_depth >= 0) opts.max_depth = heom_depth;
        if (heom_matsubara >= 0) opts.matsubara_terms = heom_matsubara;
        return opts;
    }

    void validate() const {
        if (name.empty()) throw ConfigError("name: must be a non-empty string");
        model.validate();
        if (methods.empty()) throw ConfigError("methods: must list at least one of TC2, TL2, HEOM");
        if (heom_depth == 0) throw ConfigError("heom_depth: must satisfy heom_depth >= 1");
        if (matsubara_k > max_matsubara_terms) {
            throw ConfigError("matsubara_k: must satisfy matsubara_k <= " + std::to_string(max_matsubara_terms));
        }
        if (!(rise_threshold >= 0.0)) throw ConfigError("rise_threshold: must satisfy rise_threshold >= 0");
        if (initial_state) {
            const auto& r = *initial_state;
            if (hermiticity_defect(r) > 1e-12 || std::abs(r.trace() - cplx(1.0, 0.0)) > 1e-12) {
                throw ConfigError("initial_state: must be Hermitian with unit trace");
            }
        }
    }
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::vector<std::string> warnings;
};

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& scenario_keys() {
    static const std::set<std::string> keys{
        "name",       "omega0",         "J",           "lambda",          "gamma",
        "temperature", "t_final",       "dt",          "methods",         "heom_depth",
        "heom_matsubara", "matsubara_k", "tail_correction", "initial_state", "outputs",
        "rise_threshold"};
    return keys;
}

inline std::string field_path(std::size_t index, const std::string& field) {
    return "scenarios[" + std::to_string(index) + "]." + field;
}

inline double read_number(const json& obj, const std::string& key, double fallback, std::size_t index) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(field_path(index, key) + ": must be a number");
    return v.get<double>();
}

inline int read_int(const json& obj, const std::string& key, int fallback, std::size_t index) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(field_path(index, key) + ": must be an integer");
    return v.get<int>();
}

inline DensityMatrix2 read_matrix(const json& v, std::size_t index) {
    const std::string where = field_path(index, "initial_state");
    if (!v.is_object() || !v.contains("re")) {
        throw ConfigError(where + ": must be \"exciton_plus\" or {\"re\": [[..],[..]], \"im\": [[..],[..]]}");
    }
    DensityMatrix2 m = DensityMatrix2::Zero();
    for (const char* part : {"re", "im"}) {
        if (!v.contains(part)) continue;
        const auto& rows = v.at(part);
        if (!rows.is_array() || rows.size() != 2) throw ConfigError(where + "." + part + ": must be a 2x2 array");
        for (int a = 0; a < 2; ++a) {
            if (!rows[a].is_array() || rows[a].size() != 2) {
                throw ConfigError(where + "." + part + ": must be a 2x2 array");
            }
            for (int b = 0; b < 2; ++b) {
                if (!rows[a][b].is_number()) throw ConfigError(where + "." + part + ": entries must be numbers");
                const double x = rows[a][b].get<double>();
                m(a, b) += std::string(part) == "re" ? cplx(x, 0.0) : cplx(0.0, x);
            }
        }
    }
    return m;
}

inline Scenario parse_scenario(const json& obj, std::size_t index) {
    if (!obj.is_object()) throw ConfigError("scenarios[" + std::to_string(index) + "]: must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!scenario_keys().count(key)) throw ConfigError(field_path(index, key) + ": unknown field");
    }
    Scenario s;
    if (obj.contains("name")) {
        if (!obj.at("name").is_string()) throw ConfigError(field_path(index, "name") + ": must be a string");
        s.name = obj.at("name").get<std::string>();
    } else {
        s.name = "scenario" + std::to_string(index);
    }
    auto& m = s.model;
    m.omega0 = read_number(obj, "omega0", m.omega0, index);
    m.j_coupling = read_number(obj, "J", m.j_coupling, index);
    m.lambda = read_number(obj, "lambda", m.lambda, index);
    m.gamma = read_number(obj, "gamma", m.gamma, index);
    m.temperature = read_number(obj, "temperature", m.temperature, index);
    m.t_final = read_number(obj, "t_final", 1000.0, index);
    m.dt = read_number(obj, "dt", 1.0, index);
    s.rise_threshold = read_number(obj, "rise_threshold", default_rise_threshold, index);
    s.heom_depth = read_int(obj, "heom_depth", -1, index);
    s.heom_matsubara = read_int(obj, "heom_matsubara", -1, index);
    s.matsubara_k = read_int(obj, "matsubara_k", -1, index);
    if (obj.contains("tail_correction")) {
        if (!obj.at("tail_correction").is_boolean()) {
            throw ConfigError(field_path(index, "tail_correction") + ": must be true or false");
        }
        s.tail_correction = obj.at("tail_correction").get<bool>();
    }
    if (obj.contains("methods")) {
        const auto& list = obj.at("methods");
        if (!list.is_array()) throw ConfigError(field_path(index, "methods") + ": must be an array");
        s.methods.clear();
        for (const auto& item : list) {
            const auto method = item.is_string() ? parse_method(item.get<std::string>()) : std::nullopt;
            if (!method) throw ConfigError(field_path(index, "methods") + ": entries must be TC2, TL2 or HEOM");
            if (std::find(s.methods.begin(), s.methods.end(), *method) == s.methods.end()) {
                s.methods.push_back(*method);
            }
        }
    }
    if (obj.contains("initial_state")) {
        const auto& v = obj.at("initial_state");
        if (v.is_string()) {
            if (v.get<std::string>() != "exciton_plus") {
                throw ConfigError(field_path(index, "initial_state") + ": unknown state name");
            }
        } else {
            s.initial_state = read_matrix(v, index);
        }
    }
    if (obj.contains("outputs")) {
        const auto& list = obj.at("outputs");
        if (!list.is_array()) throw ConfigError(field_path(index, "outputs") + ": must be an array");
        s.outputs = OutputFlags{false, false, false, false, false};
        for (const auto& item : list) {
            const std::string flag = item.is_string() ? item.get<std::string>() : "";
            if (flag == "populations") s.outputs.populations = true;
            else if (flag == "coherence") s.outputs.coherence = true;
            else if (flag == "concurrence") s.outputs.concurrence = true;
            else if (flag == "nm") s.outputs.nm = true;
            else if (flag == "bath_audit") s.outputs.bath_audit = true;
            else throw ConfigError(field_path(index, "outputs") +
                                   ": entries must be populations, coherence, concurrence, nm or bath_audit");
        }
    }
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("scenarios[" + std::to_string(index) + "]." + e.what());
    }
    return s;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

} // namespace detail

inline void check_unique_names(const std::vector<Scenario>& scenarios) {
    std::set<std::string> seen;
    for (const auto& s : scenarios) {
        if (!seen.insert(s.name).second) throw ConfigError("name: duplicate scenario name '" + s.name + "'");
    }
}

// Parses a scenario document: either {"scenarios": [...]} or a bare array.
inline ScenarioSet parse_scenarios(const std::string& text) {
    ScenarioSet out;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
        out.warnings.push_back("scenario file is empty; nothing to run");
        return out;
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("parse error at line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " +
                          e.what());
    }
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
        for (const auto& [key, value] : doc.items()) {
            if (key != "scenarios") throw ConfigError(key + ": unknown top-level field");
        }
        if (!doc.contains("scenarios")) throw ConfigError("scenarios: missing top-level field");
        list = &doc.at("scenarios");
    }
    if (!list->is_array()) throw ConfigError("scenarios: must be an array");
    for (std::size_t i = 0; i < list->size(); ++i) out.scenarios.push_back(detail::parse_scenario((*list)[i], i));
    if (out.scenarios.empty()) out.warnings.push_back("scenario list is empty; nothing to run");
    check_unique_names(out.scenarios);
    return out;
}

inline ScenarioSet load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario file: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenarios(buf.str());
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig1", "fig3", "fig4", "fig5", "smoke"};
    return names;
}

inline const std::vector<double>& preset_lambda_grid() {
    static const std::vector<double> grid{5.0, 20.0, 50.0, 100.0};
    return grid;
}

inline std::vector<double> preset_temperature_sweep() {
    std::vector<double> ts;
    for (int t = 150; t <= 350; t += 25) ts.push_back(t);
    return ts;
}

namespace detail {

inline std::string format_value(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

inline Scenario preset_point(const std::string& prefix, double omega0, double lambda, double gamma,
                             double temperature, OutputFlags outputs) {
    Scenario s;
    s.model.omega0 = omega0;
    s.model.j_coupling = 100.0;
    s.model.lambda = lambda;
    s.model.gamma = gamma;
    s.model.temperature = temperature;
    s.outputs = outputs;
    s.name = prefix + "_lambda" + format_value(lambda) + "_T" + format_value(temperature);
    return s;
}

} // namespace detail

inline std::vector<Scenario> preset(const std::string& name) {
    std::vector<Scenario> out;
    if (name == "fig1" || name == "fig3") {
        const OutputFlags flags = name == "fig1" ? OutputFlags{true, true, false, false, false}
                                                 : OutputFlags{true, true, true, true, false};
        for (double lambda : preset_lambda_grid())
            for (double t : {200.0, 250.0, 300.0})
                out.push_back(detail::preset_point(name, 70.0, lambda, 50.0, t, flags));
    } else if (name == "fig4") {
        for (double lambda : preset_lambda_grid())
            for (double t : preset_temperature_sweep())
                out.push_back(detail::preset_point(name, 70.0, lambda, 50.0, t, {false, false, true, true, false}));
    } else if (name == "fig5") {
        for (double t : preset_temperature_sweep())
            out.push_back(detail::preset_point(name, 40.0, 5.0, 20.0, t, {false, false, true, true, false}));
    } else if (name == "smoke") {
        auto s = detail::preset_point(name, 70.0, 0.0, 50.0, 300.0, {true, true, true, true, true});
        s.name = "smoke";
        out.push_back(s);
    } else {
        std::string valid;
        for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("preset: unknown name '" + name + "' (valid: " + valid + ")");
    }
    for (const auto& s : out) s.validate();
    return out;
}

} // namespace nmbench
