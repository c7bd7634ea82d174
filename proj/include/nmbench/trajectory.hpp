// trajectory.hpp — Uniformly sampled density-matrix trajectories and the
// adaptive ODE driver shared by the TC2, TL2 and HEOM propagators.

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nmbench/errors.hpp"
#include "nmbench/model.hpp"

namespace nmbench {

// Uniform grid {0, dt, ..., t_final}.
inline std::vector<double> uniform_grid(double t_final, double dt) {
    ModelParams p;
    p.t_final = t_final;
    p.dt = dt;
    const std::size_t n = p.steps();
    std::vector<double> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) * dt;
    return grid;
}

inline std::vector<double> uniform_grid(const ModelParams& p) { return uniform_grid(p.t_final, p.dt); }

// Time-sampled 2x2 states in the exciton basis (Schroedinger picture).
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix2> states;

    std::size_t size() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

    std::vector<double> population_plus() const {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(s(0, 0).real());
        return out;
    }

    std::vector<double> coherence_abs() const {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(std::abs(s(1, 0)));
        return out;
    }
};

using StateVector = std::vector<cplx>;

struct IntegratorOptions {
    double rtol{1e-10};
    double atol{1e-13};
    // Steps allowed between two consecutive grid samples before the run is
    // declared stuck (step-size underflow).
    int max_steps_per_sample{500000};
};

// Integrates dx/dt = rhs(x, t) with Dormand-Prince 5(4) and dense output,
// calling observe(i, x) at every grid point grid[i].
template <typename Rhs, typename Observer>
void integrate_on_grid(Rhs&& rhs, StateVector x, const std::vector<double>& grid,
                       Observer&& observe, const IntegratorOptions& opts = {}) {
    namespace ode = boost::numeric::odeint;
    if (grid.empty()) return;
    if (grid.size() == 1) {
        observe(std::size_t{0}, x);
        return;
    }

    std::size_t next = 0;
    double last_good = grid.front();
    auto system = [&rhs](const StateVector& s, StateVector& ds, double t) { rhs(s, ds, t); };
    auto observer = [&](const StateVector& s, double t) {
        observe(next++, s);
        last_good = t;
    };

    const double first_step = 0.01 * (grid[1] - grid[0]);
    try {
        ode::integrate_times(ode::make_dense_output(opts.atol, opts.rtol,
                                                    ode::runge_kutta_dopri5<StateVector>()),
                             system, x, grid.begin(), grid.end(), first_step, observer,
                             ode::max_step_checker(opts.max_steps_per_sample));
    } catch (const ode::no_progress_error& e) {
        throw IntegrationError(std::string("step-size underflow (stiffness): ") + e.what(),
                               last_good);
    }
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// Element-wise max |a - b| over all samples and matrix entries.
inline double max_abs_difference(const Trajectory& a, const Trajectory& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        d = std::max(d, (a.states[i] - b.states[i]).cwiseAbs().maxCoeff());
    }
    return d;
}

} // namespace nmbench
