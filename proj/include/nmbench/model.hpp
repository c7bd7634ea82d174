// model.hpp — Dimer parameters, system Hamiltonian and its exciton basis

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "nmbench/errors.hpp"
#include "nmbench/units.hpp"

namespace nmbench {

using cplx = std::complex<double>;
using DensityMatrix2 = Eigen::Matrix2cd;
using DensityMatrix4 = Eigen::Matrix4cd;

// Physical parameters of the dimer, its bath and the propagation window.
// Energies in cm^-1, temperature in K, times in fs.
struct ModelParams {
    double omega0{70.0};
    double j_coupling{100.0};
    double lambda{5.0};
    double gamma{50.0};
    double temperature{300.0};
    double t_final{1000.0};
    double dt{1.0};

    // Number of grid intervals; throws unless t_final/dt is integral.
    std::size_t steps() const {
        const double ratio = t_final / dt;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
            throw ConfigError("t_final/dt must be an integer number of steps (got " +
                              std::to_string(ratio) + ")");
        }
        return static_cast<std::size_t>(rounded);
    }

    void validate() const {
        auto require = [](bool ok, const char* field, const char* constraint) {
            if (!ok) throw ConfigError(std::string(field) + ": must satisfy " + constraint);
        };
        require(std::isfinite(omega0) && omega0 >= 0.0, "omega0", "omega0 >= 0");
        require(std::isfinite(j_coupling), "j_coupling", "finite");
        require(std::isfinite(lambda) && lambda >= 0.0, "lambda", "lambda >= 0");
        require(std::isfinite(gamma) && gamma > 0.0, "gamma", "gamma > 0");
        require(std::isfinite(temperature) && temperature > 0.0, "temperature",
                "temperature > 0");
        require(std::isfinite(t_final) && t_final > 0.0, "t_final", "t_final > 0");
        require(std::isfinite(dt) && dt > 0.0, "dt", "dt > 0");
        (void)steps();
    }
};

// Returns omega (rad/fs) -> hbar*omega / (2 k_B T).
inline auto thermal_quantum(const ModelParams& params) {
    if (!(params.temperature > 0.0)) {
        throw ConfigError("temperature: must satisfy temperature > 0");
    }
    const double kt = units::thermal_energy_angular(params.temperature);
    return [kt](double omega) { return omega / (2.0 * kt); };
}

// Eigen-decomposition of (omega0/2) sigma_z + J sigma_x, all in rad/fs.
// Index 0 is |chi_+>, index 1 is |chi_->.
struct ExcitonBasis {
    double big_omega{0.0};
    Eigen::Matrix2d eigvecs{Eigen::Matrix2d::Identity()};
    Eigen::Matrix2d a_matrix{Eigen::Matrix2d::Zero()};
    Eigen::Matrix2d trans_freq{Eigen::Matrix2d::Zero()};

    double energy(int mu) const { return mu == 0 ? 0.5 * big_omega : -0.5 * big_omega; }

    // System Hamiltonian in the exciton basis.
    Eigen::Matrix2cd hamiltonian() const {
        Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
        h(0, 0) = energy(0);
        h(1, 1) = energy(1);
        return h;
    }

    Eigen::Matrix2cd coupling() const { return a_matrix.cast<cplx>(); }
};

// Site-basis Hamiltonian (rad/fs), basis {|1>, |-1>}.
inline Eigen::Matrix2d site_hamiltonian(const ModelParams& params) {
    const double w0 = units::wavenumber_to_angular(params.omega0);
    const double j = units::wavenumber_to_angular(params.j_coupling);
    Eigen::Matrix2d h;
    h << 0.5 * w0, j, j, -0.5 * w0;
    return h;
}

// Gauge: the |chi_+> amplitude on |1> is nonnegative and A_{+-} = 2J/Omega.
// The fully degenerate case omega0 = J = 0 returns the identity with Omega = 0.
inline ExcitonBasis build_exciton_basis(const ModelParams& params) {
    const double w0 = units::wavenumber_to_angular(params.omega0);
    const double two_j = 2.0 * units::wavenumber_to_angular(params.j_coupling);

    ExcitonBasis basis;
    basis.big_omega = std::hypot(w0, two_j);

    Eigen::Matrix2d sigma_z;
    sigma_z << 1.0, 0.0, 0.0, -1.0;

    if (basis.big_omega == 0.0) {
        basis.eigvecs.setIdentity();
    } else {
        const double theta = std::atan2(two_j, w0);
        const double c = std::cos(0.5 * theta);
        const double s = std::sin(0.5 * theta);
        // columns: chi_+ = (c, s), chi_- = (s, -c)
        basis.eigvecs << c, s, s, -c;
    }

    basis.a_matrix = basis.eigvecs.transpose() * sigma_z * basis.eigvecs;
    basis.a_matrix(0, 1) = basis.a_matrix(1, 0) =
        0.5 * (basis.a_matrix(0, 1) + basis.a_matrix(1, 0));

    for (int mu = 0; mu < 2; ++mu) {
        for (int nu = 0; nu < 2; ++nu) {
            basis.trans_freq(mu, nu) = basis.energy(mu) - basis.energy(nu);
        }
    }
    return basis;
}

inline DensityMatrix2 exciton_plus_state() {
    DensityMatrix2 rho = DensityMatrix2::Zero();
    rho(0, 0) = 1.0;
    return rho;
}

// |j><k| in the exciton basis.
inline DensityMatrix2 basis_operator(int j, int k) {
    DensityMatrix2 op = DensityMatrix2::Zero();
    op(j, k) = 1.0;
    return op;
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Hermitian, unit trace, spectrum inside [-tol, 1 + tol].
template <typename Derived>
bool is_physical_state(const Eigen::MatrixBase<Derived>& rho, double tol = 1e-8) {
    if (hermiticity_defect(rho) > tol) return false;
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol) return false;
    using Plain = typename Derived::PlainObject;
    const Plain herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Plain> es(herm, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev.minCoeff() >= -tol && ev.maxCoeff() <= 1.0 + tol;
}

} // namespace nmbench
