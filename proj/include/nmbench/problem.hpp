// problem.hpp — Everything a propagator needs, built once per parameter point.

#pragma once

#include <vector>

#include "nmbench/bath.hpp"
#include "nmbench/model.hpp"
#include "nmbench/trajectory.hpp"

namespace nmbench {

struct BathOptions {
    // Matsubara count K; negative selects the smallest K <= 10 whose audited
    // residual is below 1e-3 of the correlation scale.
    int matsubara_terms{-1};
    // Fold the truncated Matsubara tail into a delta-correlated term.
    bool tail_correction{true};
};

struct Problem {
    ModelParams params;
    BathOptions bath;
    ExcitonBasis basis;
    ExponentialSeries series;
    std::vector<double> grid;

    double tail_delta() const { return series.tail_delta; }
};

inline Problem make_problem(const ModelParams& params, const BathOptions& bath = {}) {
    params.validate();
    Problem p;
    p.params = params;
    p.bath = bath;
    p.basis = build_exciton_basis(params);
    const auto sd = SpectralDensity::from(params);
    if (bath.matsubara_terms < 0) {
        p.series = converged_matsubara_series(sd, params.temperature);
    } else {
        p.series = matsubara_decompose(sd, params.temperature, bath.matsubara_terms);
    }
    if (!bath.tail_correction) p.series.tail_delta = 0.0;
    p.grid = uniform_grid(params);
    return p;
}

// Same point with the bath series rebuilt at a different Matsubara count.
inline Problem with_matsubara(const Problem& problem, int matsubara_terms) {
    if (problem.series.n_matsubara == matsubara_terms) return problem;
    BathOptions bath = problem.bath;
    bath.matsubara_terms = matsubara_terms;
    return make_problem(problem.params, bath);
}

} // namespace nmbench
