// heom.hpp — Hierarchical equations of motion for the Drude-Lorentz dimer.
//
// With G(t) = sum_k c_k exp(-nu_k t) (real nu_k) and coupling operator Q the
// unscaled hierarchy reads
//   d rho_n/dt = -i[H, rho_n] - (n . nu) rho_n - Delta [Q,[Q, rho_n]]
//                - i sum_k [Q, rho_{n+e_k}]
//                - i sum_k n_k (c_k Q rho_{n-e_k} - c_k^* rho_{n-e_k} Q)
// where Delta is the delta-correlated Matsubara tail. ADOs are rescaled by
// sqrt(prod_k n_k! |c_k|^{n_k}). At the maximum depth the missing ADOs are
// replaced by their time-local (Markovian) estimate
//   rho_{n+e_k} ~ -i (n_k + 1) (c_k L rho_n - c_k^* rho_n L),
//   L_ij = Q_ij / (W + i w_ij),  W = (n + e_k) . nu.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmbench/bath.hpp"
#include "nmbench/problem.hpp"
#include "nmbench/trajectory.hpp"

namespace nmbench {

inline constexpr std::size_t max_hierarchy_size = 1000000;

struct HierarchyIndex {
    std::vector<int> n;

    int depth() const {
        int d = 0;
        for (int v : n) d += v;
        return d;
    }
    auto operator<=>(const HierarchyIndex&) const = default;
};

// All indices of length `modes` with depth <= max_depth plus the raising and
// lowering neighbour tables (-1 where the neighbour lies outside the set).
struct Hierarchy {
    std::size_t modes{0};
    int max_depth{0};
    std::vector<HierarchyIndex> indices;
    std::vector<std::vector<int>> raise;
    std::vector<std::vector<int>> lower;

    std::size_t size() const { return indices.size(); }

    int find(const HierarchyIndex& idx) const {
        auto it = std::lower_bound(indices.begin(), indices.end(), idx);
        if (it == indices.end() || *it != idx) return -1;
        return static_cast<int>(it - indices.begin());
    }
};

// C(max_depth + modes, modes) without overflow for the sizes of interest.
inline double hierarchy_count(std::size_t modes, int max_depth) {
    double c = 1.0;
    for (std::size_t i = 1; i <= modes; ++i) c = c * (max_depth + static_cast<double>(i)) / static_cast<double>(i);
    return std::round(c);
}

inline Hierarchy build_hierarchy(std::size_t modes, int max_depth) {
    if (max_depth < 0) throw ConfigError("max_depth: must satisfy max_depth >= 0");
    if (modes == 0) throw ConfigError("modes: the series must contain at least one term");
    if (hierarchy_count(modes, max_depth) > static_cast<double>(max_hierarchy_size)) {
        throw std::length_error("build_hierarchy: " + std::to_string(hierarchy_count(modes, max_depth)) +
                                " ADOs exceed the cap of " + std::to_string(max_hierarchy_size));
    }
    Hierarchy h;
    h.modes = modes;
    h.max_depth = max_depth;

    HierarchyIndex cur{std::vector<int>(modes, 0)};
    // depth-first enumeration in lexicographic order
    auto recurse = [&](auto&& self, std::size_t pos, int remaining) -> void {
        if (pos == modes) {
            h.indices.push_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur.n[pos] = v;
            self(self, pos + 1, remaining - v);
        }
        cur.n[pos] = 0;
    };
    recurse(recurse, 0, max_depth);

    h.raise.assign(h.size(), std::vector<int>(modes, -1));
    h.lower.assign(h.size(), std::vector<int>(modes, -1));
    for (std::size_t i = 0; i < h.size(); ++i) {
        for (std::size_t k = 0; k < modes; ++k) {
            HierarchyIndex nb = h.indices[i];
            nb.n[k] += 1;
            if (nb.depth() <= max_depth) h.raise[i][k] = h.find(nb);
            if (h.indices[i].n[k] > 0) {
                nb.n[k] -= 2;
                h.lower[i][k] = h.find(nb);
            }
        }
    }
    return h;
}

inline Hierarchy build_hierarchy(const ExponentialSeries& series, int max_depth) {
    if (max_depth < 1) throw ConfigError("max_depth: must satisfy max_depth >= 1");
    return build_hierarchy(series.size(), max_depth);
}

struct HeomOptions {
    int max_depth{6};
    // Matsubara count for the hierarchy; negative keeps the problem's series.
    int matsubara_terms{-1};
    bool terminator{true};
    bool scaled{true};
};

// Frozen hierarchy settings, certified by convergence_scan on the preset
// grids: depth grows with lambda/gamma, and two explicit Matsubara modes plus
// the delta-correlated tail suffice for T >= 150 K.
inline HeomOptions heom_settings(const ModelParams& params) {
    HeomOptions opts;
    const double ratio = params.lambda / params.gamma;
    if (ratio <= 0.1) {
        opts.max_depth = 6;
    } else if (ratio <= 0.25) {
        opts.max_depth = 8;
    } else if (ratio <= 0.4) {
        opts.max_depth = 12;
    } else if (ratio <= 1.0) {
        opts.max_depth = 16;
    } else if (ratio <= 2.0) {
        opts.max_depth = 18;
    } else {
        opts.max_depth = 24;
    }
    opts.matsubara_terms = 2;
    return opts;
}

// Right-hand side of the hierarchy on a flat vector of row-major 2x2 ADOs.
class HeomGenerator {
public:
    using Super = Eigen::Matrix4cd;

    HeomGenerator(const ExcitonBasis& basis, const ExponentialSeries& series, const HeomOptions& opts)
        : hierarchy_(build_hierarchy(series, opts.max_depth)) {
        for (const auto& term : series.terms) {
            if (term.rate.imag() != 0.0 || !(term.rate.real() > 0.0)) {
                throw std::invalid_argument("HeomGenerator: requires real positive exponential rates");
            }
        }
        const Eigen::Matrix2cd q = basis.coupling();
        const Eigen::Matrix2cd h = basis.hamiltonian();
        const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
        const std::size_t modes = series.size();

        // row-major vec: vec(X Y Z) = (X kron Z^T) vec(Y)
        auto left = [&](const Eigen::Matrix2cd& x) { return kron(x, id); };
        auto right = [&](const Eigen::Matrix2cd& z) { return kron(id, z.transpose()); };
        const Super comm_q = left(q) - right(q);
        const Super comm_h = left(h) - right(h);

        std::vector<double> nu(modes), absc(modes);
        std::vector<cplx> c(modes);
        for (std::size_t k = 0; k < modes; ++k) {
            nu[k] = series.terms[k].rate.real();
            c[k] = series.terms[k].coefficient;
            absc[k] = std::abs(c[k]);
        }

        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) q_[2 * a + b] = q(a, b).real();
        c_ = c;

        const std::size_t n_ado = hierarchy_.size();
        local_.resize(n_ado);
        raise_scale_.assign(n_ado, std::vector<double>(modes, 0.0));
        lower_scale_.assign(n_ado, std::vector<double>(modes, 0.0));
        for (std::size_t i = 0; i < n_ado; ++i) {
            const auto& n = hierarchy_.indices[i].n;
            double damping = 0.0;
            for (std::size_t k = 0; k < modes; ++k) damping += n[k] * nu[k];

            Super local = cplx(0.0, -1.0) * comm_h - damping * Super::Identity() -
                          series.tail_delta * comm_q * comm_q;

            const bool at_edge = hierarchy_.indices[i].depth() == opts.max_depth;
            for (std::size_t k = 0; k < modes; ++k) {
                if (absc[k] == 0.0) continue;
                const double up = n[k] + 1.0;
                const double down = n[k];
                raise_scale_[i][k] = opts.scaled ? std::sqrt(up * absc[k]) : 1.0;
                lower_scale_[i][k] = opts.scaled ? std::sqrt(down / absc[k]) : down;

                if (at_edge && opts.terminator) {
                    const double w = damping + nu[k];
                    Eigen::Matrix2cd lam;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            lam(a, b) = q(a, b) / cplx(w, basis.trans_freq(a, b));
                    // -i [Q, rho_{n+e_k}] with the Markovian estimate of rho_{n+e_k}
                    const Super estimate = cplx(0.0, -1.0) * up * (c[k] * left(lam) - std::conj(c[k]) * right(lam));
                    local += cplx(0.0, -1.0) * comm_q * estimate;
                }
            }
            local_[i] = local;
        }
    }

    const Hierarchy& hierarchy() const { return hierarchy_; }
    std::size_t dimension() const { return 4 * hierarchy_.size(); }

    StateVector initial_state(const DensityMatrix2& rho0) const {
        StateVector x(dimension(), cplx{0.0, 0.0});
        const int root = hierarchy_.find(HierarchyIndex{std::vector<int>(hierarchy_.modes, 0)});
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) x[4 * root + 2 * a + b] = rho0(a, b);
        return x;
    }

    // The root ADO is the first index in lexicographic order.
    static DensityMatrix2 root(const StateVector& x) {
        DensityMatrix2 rho;
        rho << x[0], x[1], x[2], x[3];
        return rho;
    }

    // The raise terms share one commutator and the lower terms reduce to
    // Q L - L' Q, so neighbours are summed before any 2x2 product.
    void operator()(const StateVector& x, StateVector& dx, double /*t*/) const {
        using Vec = Eigen::Vector4cd;
        const std::size_t modes = hierarchy_.modes;
        const cplx minus_i(0.0, -1.0);
        for (std::size_t i = 0; i < hierarchy_.size(); ++i) {
            Vec acc = local_[i] * Eigen::Map<const Vec>(&x[4 * i]);
            cplx up[4] = {}, lo[4] = {}, lo_conj[4] = {};
            bool any_up = false, any_lo = false;
            for (std::size_t k = 0; k < modes; ++k) {
                const int u = hierarchy_.raise[i][k];
                if (u >= 0 && raise_scale_[i][k] != 0.0) {
                    const double w = raise_scale_[i][k];
                    for (int e = 0; e < 4; ++e) up[e] += w * x[4 * u + e];
                    any_up = true;
                }
                const int d = hierarchy_.lower[i][k];
                if (d >= 0 && lower_scale_[i][k] != 0.0) {
                    const cplx wc = lower_scale_[i][k] * c_[k];
                    const cplx wcc = lower_scale_[i][k] * std::conj(c_[k]);
                    for (int e = 0; e < 4; ++e) {
                        lo[e] += wc * x[4 * d + e];
                        lo_conj[e] += wcc * x[4 * d + e];
                    }
                    any_lo = true;
                }
            }
            // row-major 2x2 blocks: (A B)_{ab} = sum_c A_{ac} B_{cb}
            if (any_up) {
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        cplx v{0.0, 0.0};
                        for (int c = 0; c < 2; ++c) v += q_[2 * a + c] * up[2 * c + b] - up[2 * a + c] * q_[2 * c + b];
                        acc(2 * a + b) += minus_i * v;
                    }
            }
            if (any_lo) {
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        cplx v{0.0, 0.0};
                        for (int c = 0; c < 2; ++c)
                            v += q_[2 * a + c] * lo[2 * c + b] - lo_conj[2 * a + c] * q_[2 * c + b];
                        acc(2 * a + b) += minus_i * v;
                    }
            }
            Eigen::Map<Vec> out(&dx[4 * i]);
            out = acc;
        }
    }

private:
    static Super kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
        Super out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        return out;
    }

    Hierarchy hierarchy_;
    std::array<double, 4> q_{};
    std::vector<cplx> c_;
    std::vector<Super> local_;
    std::vector<std::vector<double>> raise_scale_;
    std::vector<std::vector<double>> lower_scale_;
};

inline Trajectory propagate_heom(const Problem& problem, const DensityMatrix2& rho0,
                                 const HeomOptions& heom = {}, const IntegratorOptions& opts = {}) {
    if (heom.matsubara_terms >= 0 && heom.matsubara_terms != problem.series.n_matsubara) {
        return propagate_heom(with_matsubara(problem, heom.matsubara_terms), rho0, heom, opts);
    }
    const HeomGenerator gen(problem.basis, problem.series, heom);
    Trajectory traj;
    traj.times = problem.grid;
    traj.states.resize(problem.grid.size());
    integrate_on_grid(gen, gen.initial_state(rho0), problem.grid,
                      [&](std::size_t i, const StateVector& x) { traj.states[i] = HeomGenerator::root(x); },
                      opts);
    return traj;
}

inline Trajectory propagate_heom(const ModelParams& params, const DensityMatrix2& rho0, int max_depth,
                                 const BathOptions& bath = {}, const IntegratorOptions& opts = {}) {
    HeomOptions heom;
    heom.max_depth = max_depth;
    return propagate_heom(make_problem(params, bath), rho0, heom, opts);
}

// ---------------------------------------------------------------------------
// Convergence of the hierarchy in depth and Matsubara count.
// ---------------------------------------------------------------------------

inline constexpr double heom_convergence_tolerance = 5e-4;

struct ConvergenceRow {
    int depth;
    int matsubara;
    // max_t of |rho_++| and ||rho_-+|| changes against the previous row;
    // NaN for the first row of a sweep
    double max_abs_delta;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> depth_sweep;
    std::vector<ConvergenceRow> matsubara_sweep;
    bool converged{false};
    // Smallest swept values from which every further increment stays below
    // tolerance; -1 when none.
    int converged_depth{-1};
    int converged_matsubara{-1};
};

// Largest change of rho_++ or |rho_-+| between two runs on the same grid.
inline double trajectory_delta(const Trajectory& a, const Trajectory& b) {
    return std::max(max_abs_difference(a.population_plus(), b.population_plus()),
                    max_abs_difference(a.coherence_abs(), b.coherence_abs()));
}

inline ConvergenceReport convergence_scan(const ModelParams& params, const DensityMatrix2& rho0,
                                          std::vector<int> depths, std::vector<int> matsubara_counts,
                                          const IntegratorOptions& opts = {},
                                          double tolerance = heom_convergence_tolerance) {
    if (depths.empty() || matsubara_counts.empty()) {
        throw ConfigError("convergence_scan: depth and Matsubara lists must be non-empty");
    }
    std::sort(depths.begin(), depths.end());
    std::sort(matsubara_counts.begin(), matsubara_counts.end());
    const int k_ref = matsubara_counts.back();
    const int d_ref = depths.back();

    ConvergenceReport report;
    auto sweep = [&](const std::vector<int>& values, bool over_depth, std::vector<ConvergenceRow>& rows) {
        std::optional<Trajectory> prev;
        for (int v : values) {
            BathOptions bath;
            bath.matsubara_terms = over_depth ? k_ref : v;
            HeomOptions heom;
            heom.max_depth = over_depth ? v : d_ref;
            auto traj = propagate_heom(make_problem(params, bath), rho0, heom, opts);
            const double delta = prev ? trajectory_delta(*prev, traj) : std::numeric_limits<double>::quiet_NaN();
            rows.push_back({heom.max_depth, bath.matsubara_terms, delta});
            prev = std::move(traj);
        }
    };
    sweep(depths, true, report.depth_sweep);
    sweep(matsubara_counts, false, report.matsubara_sweep);

    auto settle = [&](const std::vector<ConvergenceRow>& rows, bool over_depth) {
        // first row after which all deltas are below tolerance
        int found = -1;
        for (std::size_t i = rows.size() - 1; i-- > 0;) {
            if (!(rows[i + 1].max_abs_delta < tolerance)) break;
            found = over_depth ? rows[i].depth : rows[i].matsubara;
        }
        return found;
    };
    report.converged_depth = settle(report.depth_sweep, true);
    report.converged_matsubara = settle(report.matsubara_sweep, false);
    auto last_ok = [&](const std::vector<ConvergenceRow>& rows) {
        return rows.size() < 2 || rows.back().max_abs_delta < tolerance;
    };
    report.converged = last_ok(report.depth_sweep) && last_ok(report.matsubara_sweep);
    return report;
}

// Checks frozen settings (d, K) against (d + 2, K) and (d, K + 1).
struct Certification {
    HeomOptions settings;
    double depth_delta{0.0};
    double matsubara_delta{0.0};
    bool passed{false};
};

inline Certification certify_heom_settings(const Problem& problem, const DensityMatrix2& rho0,
                                           const HeomOptions& frozen, const IntegratorOptions& opts = {},
                                           double tolerance = heom_convergence_tolerance) {
    Certification out;
    out.settings = frozen;
    if (out.settings.matsubara_terms < 0) out.settings.matsubara_terms = problem.series.n_matsubara;
    const auto base = propagate_heom(problem, rho0, out.settings, opts);
    HeomOptions deeper = out.settings;
    deeper.max_depth += 2;
    out.depth_delta = trajectory_delta(base, propagate_heom(problem, rho0, deeper, opts));
    HeomOptions more = out.settings;
    more.matsubara_terms += 1;
    out.matsubara_delta = trajectory_delta(base, propagate_heom(problem, rho0, more, opts));
    out.passed = out.depth_delta < tolerance && out.matsubara_delta < tolerance;
    return out;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "sweep,depth,K,max_abs_delta\n";
    char line[128];
    for (const auto& r : report.depth_sweep) {
        std::snprintf(line, sizeof line, "depth,%d,%d,%.6e\n", r.depth, r.matsubara, r.max_abs_delta);
        os << line;
    }
    for (const auto& r : report.matsubara_sweep) {
        std::snprintf(line, sizeof line, "matsubara,%d,%d,%.6e\n", r.depth, r.matsubara, r.max_abs_delta);
        os << line;
    }
}

} // namespace nmbench
