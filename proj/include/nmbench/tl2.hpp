// tl2.hpp — Second-order time-local master equation with closed-form
// time-dependent coefficients.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nmbench/appendix.hpp"
#include "nmbench/bath.hpp"
#include "nmbench/problem.hpp"
#include "nmbench/trajectory.hpp"

namespace nmbench {

// eta(t) = int_0^t c exp(-(nu - i w) s) ds = c (1 - exp(-z t)) / z, z = nu - i w.
// Small |z t| (including the removable z = 0 point) uses the Taylor series.
inline cplx tl2_coefficient(const ExpTerm& term, double omega_a, double t) {
    const cplx z = term.rate - cplx(0.0, omega_a);
    const cplx zt = z * t;
    if (std::abs(zt) < 1e-3) {
        return term.coefficient * t * (1.0 - zt / 2.0 + zt * zt / 6.0 - zt * zt * zt / 24.0);
    }
    return term.coefficient * (1.0 - std::exp(-zt)) / z;
}

inline ExpTerm conjugate_term(const ExpTerm& term) {
    return {std::conj(term.coefficient), std::conj(term.rate)};
}

// int_0^t K(s) exp(i w s) ds for K = G or G*, including the delta-correlated
// tail (which contributes its full weight for every t > 0).
inline cplx tl2_kernel_integral(const ExponentialSeries& series, Kernel kernel, double omega_a,
                                double t) {
    cplx sum{0.0, 0.0};
    for (const auto& term : series.terms) {
        sum += tl2_coefficient(kernel == Kernel::conjugate ? conjugate_term(term) : term, omega_a, t);
    }
    if (t > 0.0) sum += series.tail_delta;
    return sum;
}

// Table of eta_{a,m}(t) over the phase pairs a = (r, c) and series terms m
// for one kernel.
struct Tl2Coefficients {
    double time{0.0};
    // eta[kernel][2 r + c][m]
    std::array<std::array<std::vector<cplx>, 4>, 2> eta;
};

inline Tl2Coefficients tl2_coefficients(const ExcitonBasis& basis, const ExponentialSeries& series,
                                        double t) {
    Tl2Coefficients table;
    table.time = t;
    for (int k = 0; k < 2; ++k) {
        for (int pair = 0; pair < 4; ++pair) {
            const double omega = basis.trans_freq(pair / 2, pair % 2);
            auto& row = table.eta[k][pair];
            for (const auto& term : series.terms) {
                row.push_back(tl2_coefficient(k == 1 ? conjugate_term(term) : term, omega, t));
            }
        }
    }
    return table;
}

using Generator4 = Eigen::Matrix4cd;

class Tl2Generator {
public:
    Tl2Generator(const ExcitonBasis& basis, const ExponentialSeries& series)
        : basis_(basis), series_(series), terms_(tl2_kernel_terms(basis)) {}

    // Instantaneous 4x4 generator acting on (s_{++}, s_{+-}, s_{-+}, s_{--}).
    Generator4 at(double t) const {
        std::array<std::array<cplx, 4>, 2> integral{};
        for (int k = 0; k < 2; ++k)
            for (int pair = 0; pair < 4; ++pair)
                integral[k][pair] = tl2_kernel_integral(series_, static_cast<Kernel>(k),
                                                        basis_.trans_freq(pair / 2, pair % 2), t);
        Generator4 gen = Generator4::Zero();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) gen(2 * a + b, 2 * a + b) = cplx(0.0, -basis_.trans_freq(a, b));
        for (const auto& term : terms_) {
            if (term.weight == 0.0) continue;
            gen(term.target(), term.source()) +=
                term.weight * integral[static_cast<int>(term.kernel)][2 * term.phase_row + term.phase_col];
        }
        return gen;
    }

    void operator()(const StateVector& x, StateVector& dx, double t) const {
        const Generator4 gen = at(t);
        for (int i = 0; i < 4; ++i) {
            cplx acc{0.0, 0.0};
            for (int j = 0; j < 4; ++j) acc += gen(i, j) * x[j];
            dx[i] = acc;
        }
    }

private:
    ExcitonBasis basis_;
    ExponentialSeries series_;
    std::vector<KernelTerm> terms_;
};

// Propagator Phi(t) of the time-local equation, dPhi/dt = L(t) Phi with
// Phi(0) = 1, sampled on the problem grid. Integrating the map instead of a
// single state makes every propagated trajectory exactly linear in rho0.
inline std::vector<Generator4> tl2_propagators(const Problem& problem, const IntegratorOptions& opts = {}) {
    const Tl2Generator gen(problem.basis, problem.series);
    auto rhs = [&gen](const StateVector& x, StateVector& dx, double t) {
        const Generator4 l = gen.at(t);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                cplx acc{0.0, 0.0};
                for (int k = 0; k < 4; ++k) acc += l(i, k) * x[4 * k + j];
                dx[4 * i + j] = acc;
            }
    };
    StateVector x0(16, cplx{0.0, 0.0});
    for (int i = 0; i < 4; ++i) x0[5 * i] = 1.0;
    std::vector<Generator4> maps(problem.grid.size());
    integrate_on_grid(rhs, x0, problem.grid,
                      [&](std::size_t i, const StateVector& x) {
                          for (int r = 0; r < 4; ++r)
                              for (int c = 0; c < 4; ++c) maps[i](r, c) = x[4 * r + c];
                      },
                      opts);
    return maps;
}

inline Trajectory apply_propagators(const std::vector<double>& times, const std::vector<Generator4>& maps,
                                    const DensityMatrix2& rho0) {
    Eigen::Vector4cd v0;
    v0 << rho0(0, 0), rho0(0, 1), rho0(1, 0), rho0(1, 1);
    Trajectory traj;
    traj.times = times;
    traj.states.resize(maps.size());
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const Eigen::Vector4cd v = maps[i] * v0;
        traj.states[i] << v(0), v(1), v(2), v(3);
    }
    return traj;
}

inline Trajectory propagate_tl2(const Problem& problem, const DensityMatrix2& rho0,
                                const IntegratorOptions& opts = {}) {
    return apply_propagators(problem.grid, tl2_propagators(problem, opts), rho0);
}

inline Trajectory propagate_tl2(const ModelParams& params, const DensityMatrix2& rho0,
                                const BathOptions& bath = {}, const IntegratorOptions& opts = {}) {
    return propagate_tl2(make_problem(params, bath), rho0, opts);
}

} // namespace nmbench
