// propagate.hpp — Uniform entry point over the three propagators.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "nmbench/heom.hpp"
#include "nmbench/measures.hpp"
#include "nmbench/problem.hpp"
#include "nmbench/tc2.hpp"
#include "nmbench/tl2.hpp"

namespace nmbench {

enum class Method { tc2, tl2, heom };

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::tc2: return "TC2";
    case Method::tl2: return "TL2";
    case Method::heom: return "HEOM";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    std::string up(s);
    for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (up == "TC2") return Method::tc2;
    if (up == "TL2") return Method::tl2;
    if (up == "HEOM") return Method::heom;
    return std::nullopt;
}

struct SolverSettings {
    HeomOptions heom{};
    IntegratorOptions integrator{};
};

inline Trajectory propagate(Method method, const Problem& problem, const DensityMatrix2& rho0,
                            const SolverSettings& settings = {}) {
    switch (method) {
    case Method::tc2: return propagate_tc2(problem, rho0, settings.integrator);
    case Method::tl2: return propagate_tl2(problem, rho0, settings.integrator);
    case Method::heom: return propagate_heom(problem, rho0, settings.heom, settings.integrator);
    }
    throw std::logic_error("propagate: unknown method");
}

inline ChoiImages choi_images(Method method, const Problem& problem, const SolverSettings& settings = {},
                              bool parallel = false) {
    return choi_images([&](const DensityMatrix2& rho0) { return propagate(method, problem, rho0, settings); },
                       parallel);
}

inline ExtendedTrajectory propagate_choi(Method method, const Problem& problem,
                                         const SolverSettings& settings = {}, bool parallel = false) {
    return assemble_choi(choi_images(method, problem, settings, parallel));
}

} // namespace nmbench
