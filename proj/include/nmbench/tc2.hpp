// tc2.hpp — Second-order time-convolution master equation.
//
// For a kernel G(s) = sum_m c_m exp(-nu_m s) every memory integral
//   z(t) = int_0^t c_m exp(-(nu_m - i w_a)(t - tau)) s_b(tau) dtau
// obeys dz/dt = c_m s_b(t) - (nu_m - i w_a) z with z(0) = 0, so the
// integro-differential system becomes a finite ODE over the density matrix
// and one auxiliary variable per (kernel, phase, source, m) combination that
// the equation actually references (16 per exponential term).

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "nmbench/appendix.hpp"
#include "nmbench/bath.hpp"
#include "nmbench/problem.hpp"
#include "nmbench/trajectory.hpp"

namespace nmbench {

class Tc2Generator {
public:
    Tc2Generator(const ExcitonBasis& basis, const ExponentialSeries& series)
        : basis_(basis), series_(series) {
        for (const auto& term : series_.terms) {
            if (!(term.rate.real() > 0.0)) {
                throw std::invalid_argument("Tc2Generator: exponential rates must have Re > 0");
            }
        }
        std::map<std::tuple<int, int, int, int>, int> slot_of;
        for (const auto& term : tc2_kernel_terms(basis_)) {
            const auto key = std::make_tuple(static_cast<int>(term.kernel), term.phase_row,
                                             term.phase_col, term.source());
            auto [it, inserted] = slot_of.try_emplace(key, static_cast<int>(channels_.size()));
            if (inserted) {
                channels_.push_back({term.kernel, basis_.trans_freq(term.phase_row, term.phase_col),
                                     term.source()});
            }
            if (term.weight != 0.0) {
                couplings_.push_back({term.target(), it->second, term.weight});
            }
        }
        if (channels_.size() != 16) {
            throw std::logic_error("Tc2Generator: expected 16 memory channels per term");
        }
    }

    std::size_t channels() const { return channels_.size(); }
    std::size_t dimension() const { return 4 + channels_.size() * series_.size(); }

    StateVector initial_state(const DensityMatrix2& rho0) const {
        StateVector x(dimension(), cplx{0.0, 0.0});
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) x[2 * a + b] = rho0(a, b);
        return x;
    }

    static DensityMatrix2 density(const StateVector& x) {
        DensityMatrix2 rho;
        rho << x[0], x[1], x[2], x[3];
        return rho;
    }

    void operator()(const StateVector& x, StateVector& dx, double /*t*/) const {
        const std::size_t nc = channels_.size();
        const double delta = series_.tail_delta;
        std::array<cplx, 16> memory{};
        for (std::size_t ch = 0; ch < nc; ++ch) memory[ch] = delta * x[channels_[ch].source];

        for (std::size_t m = 0; m < series_.size(); ++m) {
            const auto& term = series_.terms[m];
            for (std::size_t ch = 0; ch < nc; ++ch) {
                const auto& c = channels_[ch];
                const bool conj = c.kernel == Kernel::conjugate;
                const cplx coef = conj ? std::conj(term.coefficient) : term.coefficient;
                const cplx rate = (conj ? std::conj(term.rate) : term.rate) - cplx(0.0, c.omega);
                const std::size_t i = 4 + m * nc + ch;
                dx[i] = coef * x[c.source] - rate * x[i];
                memory[ch] += x[i];
            }
        }

        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                dx[2 * a + b] = cplx(0.0, -basis_.trans_freq(a, b)) * x[2 * a + b];
        for (const auto& cp : couplings_) dx[cp.target] += cp.weight * memory[cp.channel];
    }

private:
    struct Channel {
        Kernel kernel;
        double omega;
        int source;
    };
    struct Coupling {
        int target;
        int channel;
        double weight;
    };

    ExcitonBasis basis_;
    ExponentialSeries series_;
    std::vector<Channel> channels_;
    std::vector<Coupling> couplings_;
};

inline Tc2Generator assemble_tc2_system(const ExcitonBasis& basis, const ExponentialSeries& series) {
    return Tc2Generator(basis, series);
}

inline Trajectory propagate_tc2(const Problem& problem, const DensityMatrix2& rho0,
                                const IntegratorOptions& opts = {}) {
    const auto gen = assemble_tc2_system(problem.basis, problem.series);
    Trajectory traj;
    traj.times = problem.grid;
    traj.states.resize(problem.grid.size());
    integrate_on_grid(gen, gen.initial_state(rho0), problem.grid,
                      [&](std::size_t i, const StateVector& x) {
                          traj.states[i] = Tc2Generator::density(x);
                      },
                      opts);
    return traj;
}

inline Trajectory propagate_tc2(const ModelParams& params, const DensityMatrix2& rho0,
                                const BathOptions& bath = {}, const IntegratorOptions& opts = {}) {
    return propagate_tc2(make_problem(params, bath), rho0, opts);
}

// ---------------------------------------------------------------------------
// History oracle: direct product-trapezoid evaluation of the memory integrals
// with the quadrature-tabulated correlation function (no exponential series).
// ---------------------------------------------------------------------------

struct HistoryOracleOptions {
    // dt_oracle = dt / substeps
    int substeps{10};
    std::size_t max_steps{100000};
};

namespace detail {

// 24-point Gauss-Legendre nodes/weights on [0, 1].
inline void gauss_legendre_unit(std::vector<double>& nodes, std::vector<double>& weights) {
    constexpr int n = 24;
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

inline Trajectory propagate_tc2_history_oracle(const ModelParams& params, const DensityMatrix2& rho0,
                                               const HistoryOracleOptions& opts = {}) {
    params.validate();
    const auto basis = build_exciton_basis(params);
    const auto sd = SpectralDensity::from(params);
    const std::size_t coarse = params.steps();
    const std::size_t n_steps = coarse * static_cast<std::size_t>(opts.substeps);
    if (n_steps > opts.max_steps) {
        throw std::length_error("propagate_tc2_history_oracle: " + std::to_string(n_steps) +
                                " steps exceed the history memory budget");
    }
    const double h = params.dt / opts.substeps;
    const auto terms = tc2_kernel_terms(basis);

    // kernel(s) = G(s) or G*(s), tabulated on s = k h for k >= 1
    std::vector<cplx> g(n_steps + 1, cplx{0.0, 0.0});
    for (std::size_t k = 1; k <= n_steps; ++k) {
        g[k] = correlation_quadrature(sd, params.temperature, static_cast<double>(k) * h);
    }

    // Moments of G over the log-singular first interval, s = h u^4.
    std::vector<double> nodes, weights;
    detail::gauss_legendre_unit(nodes, weights);
    std::vector<cplx> g_nodes(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = nodes[i];
        g_nodes[i] = correlation_quadrature(sd, params.temperature, h * u * u * u * u);
    }

    // Channel index: kernel (2) x phase pair (4) x source (4).
    auto channel_of = [](const KernelTerm& t) {
        return (static_cast<int>(t.kernel) * 4 + 2 * t.phase_row + t.phase_col) * 4 + t.source();
    };
    constexpr int n_channels = 32;
    std::array<cplx, n_channels> m0{}, m1{};
    std::vector<std::vector<cplx>> phased(n_channels); // kernel(s_k) e^{i w_a s_k}
    std::array<bool, n_channels> used{};
    for (const auto& t : terms) used[channel_of(t)] = true;

    for (int ch = 0; ch < n_channels; ++ch) {
        if (!used[ch]) continue;
        const bool conj = ch / 16 == 1;
        const int pair = (ch / 4) % 4;
        const double omega = basis.trans_freq(pair / 2, pair % 2);
        cplx mom0{0.0, 0.0}, mom1{0.0, 0.0};
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double u = nodes[i];
            const double s = h * u * u * u * u;
            const double jac = 4.0 * h * u * u * u;
            const cplx k = (conj ? std::conj(g_nodes[i]) : g_nodes[i]) * std::exp(cplx(0.0, omega * s));
            mom0 += weights[i] * jac * k;
            mom1 += weights[i] * jac * (s / h) * k;
        }
        m0[ch] = mom0;
        m1[ch] = mom1;
        auto& tab = phased[ch];
        tab.resize(n_steps + 1);
        for (std::size_t k = 1; k <= n_steps; ++k) {
            const double s = static_cast<double>(k) * h;
            tab[k] = (conj ? std::conj(g[k]) : g[k]) * std::exp(cplx(0.0, omega * s));
        }
    }

    // d s/dt = L0 s + sum_terms w I_channel; I(t_{n+1}) = (M0 - M1) s_{n+1} + history.
    using Vec4 = Eigen::Vector4cd;
    using Mat4 = Eigen::Matrix4cd;
    Mat4 implicit_part = Mat4::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) implicit_part(2 * a + b, 2 * a + b) = cplx(0.0, -basis.trans_freq(a, b));
    for (const auto& t : terms) {
        const int ch = channel_of(t);
        implicit_part(t.target(), t.source()) += t.weight * (m0[ch] - m1[ch]);
    }
    const Mat4 lhs = Mat4::Identity() - 0.5 * h * implicit_part;
    const Eigen::PartialPivLU<Mat4> solver(lhs);

    std::vector<Vec4> history;
    history.reserve(n_steps + 1);
    Vec4 s0;
    s0 << rho0(0, 0), rho0(0, 1), rho0(1, 0), rho0(1, 1);
    history.push_back(s0);

    auto explicit_memory = [&](std::size_t n_next, std::array<cplx, n_channels>& out) {
        // history part of I(t_{n_next}), excluding the s_{n_next} endpoint
        const std::size_t n = n_next - 1;
        for (int ch = 0; ch < n_channels; ++ch) {
            if (!used[ch]) continue;
            const int src = ch % 4;
            const auto& tab = phased[ch];
            cplx acc = m1[ch] * history[n](src);
            if (n >= 1) {
                acc += 0.5 * h * tab[1] * history[n](src);
                for (std::size_t j = 2; j <= n; ++j) acc += h * tab[j] * history[n + 1 - j](src);
                acc += 0.5 * h * tab[n + 1] * history[0](src);
            }
            out[ch] = acc;
        }
    };

    std::array<cplx, n_channels> mem{};
    auto full_rhs = [&](const Vec4& s, const std::array<cplx, n_channels>& hist) {
        Vec4 f = implicit_part * s;
        for (const auto& t : terms) f(t.target()) += t.weight * hist[channel_of(t)];
        return f;
    };

    Vec4 f_prev; // empty memory at t = 0
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) f_prev(2 * a + b) = cplx(0.0, -basis.trans_freq(a, b)) * s0(2 * a + b);
    for (std::size_t n = 0; n < n_steps; ++n) {
        explicit_memory(n + 1, mem);
        Vec4 hist_term = Vec4::Zero();
        for (const auto& t : terms) hist_term(t.target()) += t.weight * mem[channel_of(t)];
        const Vec4 rhs = history[n] + 0.5 * h * (f_prev + hist_term);
        const Vec4 next = solver.solve(rhs);
        history.push_back(next);
        f_prev = full_rhs(next, mem);
    }

    Trajectory traj;
    traj.times = uniform_grid(params);
    traj.states.reserve(traj.times.size());
    for (std::size_t i = 0; i <= coarse; ++i) {
        const auto& v = history[i * static_cast<std::size_t>(opts.substeps)];
        DensityMatrix2 rho;
        rho << v(0), v(1), v(2), v(3);
        traj.states.push_back(rho);
    }
    return traj;
}

} // namespace nmbench
