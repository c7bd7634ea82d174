// bath.hpp — Drude-Lorentz spectral density, its correlation function and the
// Matsubara exponential series used by every propagator.
//
// Conventions (hbar = 1, all frequencies in rad/fs, times in fs):
//   J(w)  = (2 lambda gamma / pi) w / (w^2 + gamma^2)
//   G(t)  = int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw
//         ~ sum_m c_m exp(-nu_m t),                          t > 0
//
// Re G(t) diverges logarithmically as t -> 0+ because J(w) ~ 1/w at large w;
// the quadrature therefore refuses t = 0 and the calibration grid starts at
// the first nonzero sample.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "nmbench/errors.hpp"
#include "nmbench/model.hpp"
#include "nmbench/units.hpp"

namespace nmbench {

// Drude-Lorentz parameters in cm^-1.
struct SpectralDensity {
    double lambda{0.0};
    double gamma{1.0};

    static SpectralDensity from(const ModelParams& p) { return {p.lambda, p.gamma}; }
};

// J(omega) with omega, lambda, gamma and the result in cm^-1.
inline double spectral_density_at(const SpectralDensity& sd, double omega) {
    return (2.0 * sd.lambda * sd.gamma / std::numbers::pi) * omega /
           (omega * omega + sd.gamma * sd.gamma);
}

struct ExpTerm {
    cplx coefficient; // (rad/fs)^2
    cplx rate;        // rad/fs, Re > 0
};

struct ExponentialSeries {
    std::vector<ExpTerm> terms;
    int n_matsubara{0};
    // Weight of the delta-correlated remainder sum_{k>K} c_k / nu_k (rad/fs):
    // the truncated Matsubara tail behaves as 2 * tail_delta * delta(t).
    double tail_delta{0.0};
    // sup_t |series - quadrature| on the calibration grid; NaN if not audited.
    double residual_bound{std::numeric_limits<double>::quiet_NaN()};
    // sup_t |quadrature| on the same grid, the scale for relative statements.
    double residual_scale{std::numeric_limits<double>::quiet_NaN()};

    std::size_t size() const { return terms.size(); }
    bool audited() const { return std::isfinite(residual_bound); }
    double relative_residual() const { return residual_bound / residual_scale; }
};

namespace detail {

struct AngularBath {
    double lambda; // rad/fs
    double gamma;  // rad/fs
    double beta;   // fs
};

inline AngularBath to_angular(const SpectralDensity& sd, double temperature) {
    return {units::wavenumber_to_angular(sd.lambda), units::wavenumber_to_angular(sd.gamma),
            1.0 / units::thermal_energy_angular(temperature)};
}

// J(w) coth(beta w / 2) with the removable 0 * inf at w = 0 expanded.
inline double thermal_weight(const AngularBath& b, double omega) {
    const double x = 0.5 * b.beta * omega;
    const double x_coth_x = std::abs(omega) < 1e-6 * b.gamma ? 1.0 + x * x / 3.0
                                                             : x / std::tanh(x);
    return (2.0 * b.lambda * b.gamma / std::numbers::pi) * (2.0 / b.beta) * x_coth_x /
           (omega * omega + b.gamma * b.gamma);
}

inline double angular_spectral_density(const AngularBath& b, double omega) {
    return (2.0 * b.lambda * b.gamma / std::numbers::pi) * omega /
           (omega * omega + b.gamma * b.gamma);
}

} // namespace detail

inline constexpr double correlation_quadrature_rtol = 1e-9;

// G(t) in (rad/fs)^2 by double-exponential Fourier quadrature (Ooura-Mori)
// on the rescaled variable x = omega / gamma.
inline cplx correlation_quadrature(const SpectralDensity& sd, double temperature, double t) {
    if (!(temperature > 0.0)) throw ConfigError("temperature: must satisfy temperature > 0");
    if (!(t >= 0.0)) throw ConfigError("t: must satisfy t >= 0");
    if (sd.lambda == 0.0) return {0.0, 0.0};
    if (t == 0.0) {
        throw QuadratureError("correlation_quadrature: Re G(0) diverges logarithmically for a "
                              "Drude-Lorentz bath",
                              std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity());
    }

    const auto b = detail::to_angular(sd, temperature);
    const double tau = b.gamma * t;
    using boost::math::quadrature::ooura_fourier_cos;
    using boost::math::quadrature::ooura_fourier_sin;
    static thread_local ooura_fourier_cos<double> cos_integrator(correlation_quadrature_rtol * 1e-2, 14);
    static thread_local ooura_fourier_sin<double> sin_integrator(correlation_quadrature_rtol * 1e-2, 14);

    auto re_integrand = [&](double x) { return b.gamma * detail::thermal_weight(b, b.gamma * x); };
    auto im_integrand = [&](double x) {
        return b.gamma * detail::angular_spectral_density(b, b.gamma * x);
    };
    const auto [re, re_err] = cos_integrator.integrate(re_integrand, tau);
    const auto [im, im_err] = sin_integrator.integrate(im_integrand, tau);

    // Ooura-Mori reports relative error estimates
    const double scale = std::hypot(re, im);
    const double err = std::hypot(re_err * std::abs(re), im_err * std::abs(im));
    if (!std::isfinite(re) || !std::isfinite(im) || err > correlation_quadrature_rtol * scale) {
        throw QuadratureError("correlation_quadrature: no convergence at t = " + std::to_string(t) +
                                  " fs",
                              scale, err);
    }
    return {re, -im};
}

// int_0^inf J(w)/w dw in cm^-1; recovers lambda.
inline double reorganization_energy_quadrature(const SpectralDensity& sd) {
    if (sd.lambda == 0.0) return 0.0;
    boost::math::quadrature::exp_sinh<double> integrator;
    // J(w)/w = (2 lambda gamma / pi) / (w^2 + gamma^2), regular at w = 0
    auto integrand = [&](double w) {
        return (2.0 * sd.lambda * sd.gamma / std::numbers::pi) / (w * w + sd.gamma * sd.gamma);
    };
    const double value =
        integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
    return value;
}

// Calibration grid: 101 points on [0, 500] fs, of which the t = 0 sample is
// skipped because Re G diverges there.
inline std::vector<double> calibration_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(5.0 * i);
    return grid;
}

struct CalibrationTable {
    std::vector<double> times;
    std::vector<cplx> values;
};

inline CalibrationTable tabulate_correlation(const SpectralDensity& sd, double temperature) {
    CalibrationTable table;
    table.times = calibration_grid();
    table.values.reserve(table.times.size());
    for (double t : table.times) table.values.push_back(correlation_quadrature(sd, temperature, t));
    return table;
}

inline cplx series_eval(const ExponentialSeries& series, double t) {
    cplx sum{0.0, 0.0};
    for (const auto& term : series.terms) sum += term.coefficient * std::exp(-term.rate * t);
    return sum;
}

// Fills residual_bound / residual_scale against a precomputed table.
inline void audit_series(ExponentialSeries& series, const CalibrationTable& table) {
    double bound = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        bound = std::max(bound, std::abs(series_eval(series, table.times[i]) - table.values[i]));
        scale = std::max(scale, std::abs(table.values[i]));
    }
    series.residual_bound = bound;
    series.residual_scale = scale;
}

// Closed-form Matsubara expansion of G(t) without the quadrature audit.
inline ExponentialSeries matsubara_series(const SpectralDensity& sd, double temperature,
                                          int n_terms) {
    if (!(temperature > 0.0)) throw ConfigError("temperature: must satisfy temperature > 0");
    if (n_terms < 0) throw ConfigError("n_terms: must satisfy n_terms >= 0");
    if (!(sd.gamma > 0.0)) throw ConfigError("gamma: must satisfy gamma > 0");
    if (!(sd.lambda >= 0.0)) throw ConfigError("lambda: must satisfy lambda >= 0");

    const auto b = detail::to_angular(sd, temperature);
    const double half = 0.5 * b.beta * b.gamma;
    const double nearest = std::round(half / std::numbers::pi);
    if (nearest >= 1.0 && std::abs(half - nearest * std::numbers::pi) < 1e-6) {
        const int k = static_cast<int>(nearest);
        throw PoleProximityError("matsubara_decompose: Matsubara frequency nu_" + std::to_string(k) +
                                     " coincides with gamma (cot pole); perturb T or gamma",
                                 k);
    }

    ExponentialSeries series;
    series.n_matsubara = n_terms;
    const double cot = 1.0 / std::tan(half);
    series.terms.push_back({cplx(b.lambda * b.gamma * cot, -b.lambda * b.gamma), cplx(b.gamma, 0.0)});

    double captured = 0.0;
    for (int k = 1; k <= n_terms; ++k) {
        const double nu = 2.0 * std::numbers::pi * k / b.beta;
        const double c = (4.0 * b.lambda * b.gamma / b.beta) * nu / (nu * nu - b.gamma * b.gamma);
        series.terms.push_back({cplx(c, 0.0), cplx(nu, 0.0)});
        captured += c / nu;
    }
    // sum_{k>=1} c_k / nu_k = 2 lambda / (beta gamma) - lambda cot(beta gamma / 2)
    const double full = 2.0 * b.lambda / (b.beta * b.gamma) - b.lambda * cot;
    series.tail_delta = b.lambda == 0.0 ? 0.0 : std::max(0.0, full - captured);
    return series;
}

// Matsubara expansion with residual_bound audited against the quadrature.
inline ExponentialSeries matsubara_decompose(const SpectralDensity& sd, double temperature,
                                             int n_terms) {
    auto series = matsubara_series(sd, temperature, n_terms);
    audit_series(series, tabulate_correlation(sd, temperature));
    return series;
}

inline constexpr int max_matsubara_terms = 10;
inline constexpr double default_relative_residual = 1e-3;

// Smallest K <= 10 whose audited residual is below the relative target; the
// K = 10 series is returned if none qualifies.
inline ExponentialSeries converged_matsubara_series(const SpectralDensity& sd, double temperature,
                                                    double relative_target = default_relative_residual) {
    const auto table = tabulate_correlation(sd, temperature);
    ExponentialSeries series;
    for (int k = 0; k <= max_matsubara_terms; ++k) {
        series = matsubara_series(sd, temperature, k);
        audit_series(series, table);
        if (sd.lambda == 0.0 || series.relative_residual() <= relative_target) break;
    }
    return series;
}

// Columns: m, Re c_m, Im c_m, Re nu_m, Im nu_m (rad/fs units).
inline void write_series_csv(std::ostream& os, const ExponentialSeries& series) {
    os << "m,re_c,im_c,re_nu,im_nu\n";
    char line[160];
    for (std::size_t m = 0; m < series.terms.size(); ++m) {
        const auto& t = series.terms[m];
        std::snprintf(line, sizeof line, "%zu,%.12e,%.12e,%.12e,%.12e\n", m, t.coefficient.real(),
                      t.coefficient.imag(), t.rate.real(), t.rate.imag());
        os << line;
    }
}

} // namespace nmbench
