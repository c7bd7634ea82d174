#include <cmath>

#include <gtest/gtest.h>

#include "nmbench/heom.hpp"

using namespace nmbench;

namespace {

ModelParams point(double lambda, double temperature) {
    ModelParams p;
    p.lambda = lambda;
    p.temperature = temperature;
    return p;
}

} // namespace

TEST(Hierarchy, Counts) {
    EXPECT_EQ(build_hierarchy(3, 4).size(), 35u);
    EXPECT_EQ(hierarchy_count(3, 4), 35u);
    EXPECT_EQ(build_hierarchy(1, 2).size(), 3u);
    const auto s = matsubara_series(SpectralDensity{5.0, 50.0}, 300.0, 0);
    EXPECT_EQ(build_hierarchy(s, 2).size(), 3u);
    EXPECT_EQ(hierarchy_count(4, 16), 4845u);
}

TEST(Hierarchy, RootFirstAndLadderRoundTrip) {
    const auto h = build_hierarchy(3, 5);
    EXPECT_EQ(h.indices.front().depth(), 0);
    for (std::size_t i = 0; i + 1 < h.size(); ++i) EXPECT_TRUE(h.indices[i] < h.indices[i + 1]);
    for (std::size_t i = 0; i < h.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            const int up = h.raise[i][k];
            if (up >= 0) {
                EXPECT_EQ(h.lower[up][k], static_cast<int>(i));
                EXPECT_EQ(h.indices[up].n[k], h.indices[i].n[k] + 1);
            } else {
                EXPECT_EQ(h.indices[i].depth(), 5);
            }
        }
    }
}

TEST(Hierarchy, GuardsItsSize) {
    EXPECT_THROW(build_hierarchy(12, 40), std::length_error);
    const auto s = matsubara_series(SpectralDensity{5.0, 50.0}, 300.0, 1);
    EXPECT_THROW(build_hierarchy(s, 0), ConfigError);
}

TEST(Heom, ZeroCouplingIsUnitary) {
    auto p = point(0.0, 300.0);
    DensityMatrix2 r;
    r << 0.5, 0.5, 0.5, 0.5;
    const auto traj = propagate_heom(p, r, 4);
    const double omega = build_exciton_basis(p).big_omega;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        EXPECT_NEAR(traj.states[i](0, 0).real(), 0.5, 1e-10);
        EXPECT_NEAR(std::abs(traj.states[i](0, 1) - 0.5 * std::exp(cplx(0.0, -omega * traj.times[i]))), 0.0, 1e-8);
    }
}

TEST(Heom, TraceHermiticityPositivityLinearity) {
    const auto problem = make_problem(point(50.0, 250.0), {2, true});
    const auto settings = heom_settings(problem.params);
    DensityMatrix2 r;
    r << cplx(0.6, 0.0), cplx(0.2, -0.1), cplx(0.2, 0.1), cplx(0.4, 0.0);
    const auto tr = propagate_heom(problem, r, settings);
    for (const auto& s : tr.states) {
        EXPECT_NEAR(std::abs(s.trace() - cplx(1.0, 0.0)), 0.0, 1e-8);
        EXPECT_LT(hermiticity_defect(s), 1e-9);
        EXPECT_TRUE(is_physical_state(s, 1e-6));
    }
    const cplx a(0.3, -1.2), b(-0.7, 0.4);
    const auto tx = propagate_heom(problem, basis_operator(0, 1), settings);
    const auto tz = propagate_heom(problem, a * basis_operator(0, 1) + b * r, settings);
    for (std::size_t i = 0; i < tz.states.size(); ++i) {
        EXPECT_LT((tz.states[i] - (a * tx.states[i] + b * tr.states[i])).cwiseAbs().maxCoeff(), 1e-9);
    }
}

// Unscaled hierarchy written out independently (SciPy, operator form),
// K = 3, depth 4, no terminator, no tail term; lambda = 5, T = 250 K.
TEST(Heom, MatchesIndependentHierarchy) {
    const auto problem = make_problem(point(5.0, 250.0), {3, false});
    HeomOptions h;
    h.max_depth = 4;
    h.terminator = false;
    const auto traj = propagate_heom(problem, exciton_plus_state(), h);
    EXPECT_NEAR(traj.states[100](0, 0).real(), 0.863163771312097, 2e-6);
    EXPECT_NEAR(traj.states[500](0, 0).real(), 0.6303101060129424, 2e-6);
    EXPECT_NEAR(traj.states[1000](0, 0).real(), 0.446711489226582, 2e-6);
}

TEST(Heom, ScalingDoesNotChangeTheRoot) {
    const auto problem = make_problem(point(20.0, 300.0), {2, true});
    HeomOptions scaled, plain;
    scaled.max_depth = plain.max_depth = 6;
    plain.scaled = false;
    EXPECT_LT(max_abs_difference(propagate_heom(problem, exciton_plus_state(), scaled),
                                 propagate_heom(problem, exciton_plus_state(), plain)),
              1e-8);
}

TEST(Heom, WeakCouplingConvergesByDepthSix) {
    const auto report = convergence_scan(point(5.0, 300.0), exciton_plus_state(), {2, 4, 6, 8}, {1, 2, 3});
    EXPECT_TRUE(report.converged);
    EXPECT_GE(report.converged_depth, 1);
    EXPECT_LE(report.converged_depth, 6);
    EXPECT_GE(report.converged_matsubara, 1);
    EXPECT_TRUE(std::isnan(report.depth_sweep.front().max_abs_delta));
}

TEST(Heom, FrozenSettingsAreCertified) {
    for (const auto& [lambda, temperature] : {std::pair{5.0, 300.0}, std::pair{20.0, 350.0}, std::pair{50.0, 250.0}}) {
        const auto p = point(lambda, temperature);
        const auto cert = certify_heom_settings(make_problem(p), exciton_plus_state(), heom_settings(p));
        EXPECT_TRUE(cert.passed) << "lambda " << lambda << ": depth delta " << cert.depth_delta
                                 << ", K delta " << cert.matsubara_delta;
    }
}

TEST(Heom, DepthErrorShrinks) {
    const auto problem = make_problem(point(50.0, 250.0), {2, true});
    double previous = INFINITY;
    for (int d = 6; d <= 12; d += 2) {
        HeomOptions a, b;
        a.max_depth = d;
        b.max_depth = d + 2;
        const double delta = trajectory_delta(propagate_heom(problem, exciton_plus_state(), a),
                                              propagate_heom(problem, exciton_plus_state(), b));
        EXPECT_LT(delta, previous) << "depth " << d;
        previous = delta;
    }
}

TEST(Heom, FrozenDepthGrowsWithCoupling) {
    int previous = 0;
    for (double lambda : {5.0, 20.0, 50.0, 100.0}) {
        const int depth = heom_settings(point(lambda, 300.0)).max_depth;
        EXPECT_GE(depth, previous);
        previous = depth;
    }
    EXPECT_LE(heom_settings(point(5.0, 300.0)).max_depth, 6);
}
