// measures.hpp — System-ancilla Choi states, Wootters concurrence and the
// entanglement-based (RHP) non-Markovianity measure.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nmbench/errors.hpp"
#include "nmbench/model.hpp"
#include "nmbench/trajectory.hpp"

namespace nmbench {

// rho_{sys,anc}(t) sampled on a uniform grid; index 2*s + a with s the system
// and a the ancilla exciton label.
struct ExtendedTrajectory {
    std::vector<double> times;
    std::vector<DensityMatrix4> states;

    std::size_t size() const { return times.size(); }
};

// |Psi><Psi| with Psi = (|++> + |-->)/sqrt(2).
inline DensityMatrix4 maximally_entangled_state() {
    DensityMatrix4 rho = DensityMatrix4::Zero();
    for (int j : {0, 3})
        for (int k : {0, 3}) rho(j, k) = 0.5;
    return rho;
}

// sum_jk 1/2 E(|j><k|) (x) |j><k|
inline DensityMatrix4 assemble_choi(const std::array<std::array<DensityMatrix2, 2>, 2>& images) {
    DensityMatrix4 rho = DensityMatrix4::Zero();
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) rho(2 * a + j, 2 * b + k) = 0.5 * images[j][k](a, b);
    return rho;
}

inline ExtendedTrajectory assemble_choi(const std::array<std::array<Trajectory, 2>, 2>& images) {
    ExtendedTrajectory ext;
    ext.times = images[0][0].times;
    ext.states.reserve(ext.times.size());
    for (std::size_t i = 0; i < ext.times.size(); ++i) {
        std::array<std::array<DensityMatrix2, 2>, 2> at{};
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) at[j][k] = images[j][k].states[i];
        ext.states.push_back(assemble_choi(at));
    }
    return ext;
}

// Propagates |0><0|, |0><1| and |1><1| through a linear map rho0 -> Trajectory
// and assembles (E x I)(|Psi><Psi|); E(|1><0|) = E(|0><1|)^dagger because all
// propagators preserve Hermiticity. The runs are independent and are
// dispatched concurrently when `parallel` is set.
using ChoiImages = std::array<std::array<Trajectory, 2>, 2>;

template <typename Propagator>
ChoiImages choi_images(Propagator&& propagate, bool parallel = false) {
    constexpr std::array<std::pair<int, int>, 3> inputs{{{0, 0}, {0, 1}, {1, 1}}};
    ChoiImages images;
    if (parallel) {
        std::array<std::future<Trajectory>, 3> pending;
        for (std::size_t r = 0; r < inputs.size(); ++r) {
            const auto [j, k] = inputs[r];
            pending[r] = std::async(std::launch::async,
                                    [&propagate, j, k] { return propagate(basis_operator(j, k)); });
        }
        for (std::size_t r = 0; r < inputs.size(); ++r) images[inputs[r].first][inputs[r].second] = pending[r].get();
    } else {
        for (const auto& [j, k] : inputs) images[j][k] = propagate(basis_operator(j, k));
    }
    images[1][0].times = images[0][1].times;
    for (const auto& s : images[0][1].states) images[1][0].states.push_back(s.adjoint());
    return images;
}

template <typename Propagator>
ExtendedTrajectory propagate_choi(Propagator&& propagate, bool parallel = false) {
    return assemble_choi(choi_images(std::forward<Propagator>(propagate), parallel));
}

// ---------------------------------------------------------------------------
// Wootters concurrence
// ---------------------------------------------------------------------------

// sigma_y (x) sigma_y, real in the computational basis.
inline Eigen::Matrix4d spin_flip() {
    Eigen::Matrix4d y = Eigen::Matrix4d::Zero();
    y(0, 3) = -1.0;
    y(1, 2) = 1.0;
    y(2, 1) = 1.0;
    y(3, 0) = -1.0;
    return y;
}

struct ConcurrenceOptions {
    // Tolerance on Hermiticity, trace and negative eigenvalues.
    double tolerance{1e-8};
    // Skip the positivity precondition (negative eigenvalues are clipped).
    bool require_positive{true};
};

// The lambda_i of the Wootters formula are the singular values of
// sqrt(rho) sqrt(rho~), rho~ = Y rho* Y, which avoids taking square roots of
// rounding-level eigenvalues of rho rho~.
inline std::array<double, 4> wootters_lambdas(const DensityMatrix4& rho) {
    const DensityMatrix4 herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(herm);
    Eigen::Vector4d roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const DensityMatrix4 sqrt_rho = es.eigenvectors() * roots.cast<cplx>().asDiagonal() *
                                    es.eigenvectors().adjoint();
    const Eigen::Matrix4cd y = spin_flip().cast<cplx>();
    const DensityMatrix4 sqrt_flipped = y * sqrt_rho.conjugate() * y;
    Eigen::JacobiSVD<DensityMatrix4> svd(sqrt_rho * sqrt_flipped);
    const auto& sv = svd.singularValues();
    std::array<double, 4> out{sv(0), sv(1), sv(2), sv(3)};
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

inline double concurrence(const DensityMatrix4& rho, const ConcurrenceOptions& opts = {}) {
    if (hermiticity_defect(rho) > opts.tolerance) {
        throw std::domain_error("concurrence: input is not Hermitian");
    }
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > opts.tolerance) {
        throw std::domain_error("concurrence: input does not have unit trace");
    }
    if (opts.require_positive) {
        Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -opts.tolerance) {
            throw std::domain_error("concurrence: input has a negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
        }
    }
    const auto l = wootters_lambdas(rho);
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

inline double min_eigenvalue(const DensityMatrix4& rho) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Non-Markovianity
// ---------------------------------------------------------------------------

inline constexpr double default_rise_threshold = 1e-9;

struct NmReport {
    std::vector<double> times;
    std::vector<double> concurrence;
    // Sums over the thresholded increments: rises below rise_threshold count
    // as zero, so nm_value = total_variation - net_drop = 2 * rises.
    double total_variation{0.0};
    double net_drop{0.0};
    double nm_value{0.0};
    double rise_threshold{default_rise_threshold};
    // Largest E(t) - min_{s<=t} E(s).
    double max_revival{0.0};
    // Smallest eigenvalue of the Choi state over the trajectory.
    double min_choi_eigenvalue{0.0};
};

inline NmReport non_markovianity(std::vector<double> times, std::vector<double> series,
                                 double rise_threshold = default_rise_threshold) {
    if (series.size() < 2 || times.size() != series.size()) {
        throw ConfigError("non_markovianity: need at least two samples with matching times");
    }
    if (!(rise_threshold >= 0.0)) throw ConfigError("rise_threshold: must satisfy rise_threshold >= 0");

    NmReport report;
    report.rise_threshold = rise_threshold;
    double rises = 0.0;
    double drops = 0.0;
    double running_min = series.front();
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double d = series[i] - series[i - 1];
        if (d > 0.0) {
            if (d >= rise_threshold) rises += d;
        } else {
            drops -= d;
        }
        running_min = std::min(running_min, series[i]);
        report.max_revival = std::max(report.max_revival, series[i] - running_min);
    }
    report.total_variation = rises + drops;
    report.net_drop = drops - rises;
    report.nm_value = 2.0 * rises;
    report.times = std::move(times);
    report.concurrence = std::move(series);
    return report;
}

inline std::vector<double> concurrence_series(const ExtendedTrajectory& traj,
                                              const ConcurrenceOptions& opts = {}) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.states) out.push_back(concurrence(s, opts));
    return out;
}

// Choi states of approximate master equations need not be positive; the
// positivity precondition is relaxed here and the worst eigenvalue recorded.
inline NmReport non_markovianity(const ExtendedTrajectory& traj,
                                 double rise_threshold = default_rise_threshold) {
    ConcurrenceOptions opts;
    opts.require_positive = false;
    auto report = non_markovianity(traj.times, concurrence_series(traj, opts), rise_threshold);
    double lowest = 0.0;
    for (const auto& s : traj.states) lowest = std::min(lowest, min_eigenvalue(s));
    report.min_choi_eigenvalue = lowest;
    return report;
}

} // namespace nmbench
