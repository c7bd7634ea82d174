// Independent reference calculations for the test suites (GSL quadrature,
// no code shared with the library's Boost-based integrators).

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double cm_to_rad_fs = 2.0 * pi * 2.99792458e-5;
inline constexpr double kb_cm_per_k = 0.695034800;

struct Bath {
    double lambda;  // rad/fs
    double gamma;   // rad/fs
    double beta;    // fs/rad

    static Bath from_wavenumbers(double lambda_cm, double gamma_cm, double temperature) {
        return {lambda_cm * cm_to_rad_fs, gamma_cm * cm_to_rad_fs,
                1.0 / (kb_cm_per_k * temperature * cm_to_rad_fs)};
    }

    double spectral(double w) const { return (2.0 * lambda * gamma / pi) * w / (w * w + gamma * gamma); }

    // J(w) coth(beta w / 2), finite at w = 0
    double symmetric(double w) const {
        if (w < 1e-12) return (2.0 * lambda / (pi * gamma)) * (2.0 / beta);
        return spectral(w) / std::tanh(0.5 * beta * w);
    }
};

class Workspace {
public:
    explicit Workspace(std::size_t n = 20000)
        : ws_(gsl_integration_workspace_alloc(n)), cyc_(gsl_integration_workspace_alloc(n)), n_(n) {
        gsl_set_error_handler_off();
    }
    ~Workspace() {
        gsl_integration_workspace_free(ws_);
        gsl_integration_workspace_free(cyc_);
    }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    gsl_integration_workspace* ws() { return ws_; }
    gsl_integration_workspace* cyc() { return cyc_; }
    std::size_t size() const { return n_; }

private:
    gsl_integration_workspace* ws_;
    gsl_integration_workspace* cyc_;
    std::size_t n_;
};

using Fn = std::function<double(double)>;

inline double trampoline(double x, void* p) { return (*static_cast<Fn*>(p))(x); }

inline void check(int status, const char* what) {
    if (status != GSL_SUCCESS && status != GSL_EROUND) {
        throw std::runtime_error(std::string(what) + ": " + gsl_strerror(status));
    }
}

// int_a^inf f(w) trig(w t) dw
inline double fourier_tail(Fn f, double a, double t, bool sine, Workspace& w) {
    gsl_integration_qawo_table* table =
        gsl_integration_qawo_table_alloc(t, 1.0, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50);
    gsl_function g{&trampoline, &f};
    double result = 0.0, err = 0.0;
    const int status = gsl_integration_qawf(&g, a, 1e-16, w.size(), w.ws(), w.cyc(), table, &result, &err);
    gsl_integration_qawo_table_free(table);
    check(status, "qawf");
    return result;
}

inline double finite(Fn f, double a, double b, Workspace& w) {
    gsl_function g{&trampoline, &f};
    double result = 0.0, err = 0.0;
    check(gsl_integration_qag(&g, a, b, 0.0, 1e-12, w.size(), GSL_INTEG_GAUSS61, w.ws(), &result, &err), "qag");
    return result;
}

inline double semi_infinite(Fn f, double a, Workspace& w) {
    gsl_function g{&trampoline, &f};
    double result = 0.0, err = 0.0;
    check(gsl_integration_qagiu(&g, a, 0.0, 1e-12, w.size(), w.ws(), &result, &err), "qagiu");
    return result;
}

// G(t) = int_0^inf J(w) [coth(beta w/2) cos(w t) - i sin(w t)] dw, t > 0.
inline std::complex<double> correlation(const Bath& b, double t) {
    Workspace w;
    const double re = fourier_tail([&](double x) { return b.symmetric(x); }, 0.0, t, false, w);
    const double im = -fourier_tail([&](double x) { return b.spectral(x); }, 0.0, t, true, w);
    return {re, im};
}

// Pure-dephasing exponent 4 int_0^t (t - s) Re G(s) ds
//   = 4 int_0^inf J(w) coth(beta w/2) (1 - cos w t) / w^2 dw.
inline double dephasing_exponent(const Bath& b, double t) {
    if (t == 0.0) return 0.0;
    Workspace w;
    const double cut = 40.0 * b.gamma + 20.0 / b.beta;
    auto kernel = [&](double x) {
        if (x * t < 1e-4) return b.symmetric(x) * t * t * (0.5 - x * x * t * t / 24.0);
        return b.symmetric(x) * (1.0 - std::cos(x * t)) / (x * x);
    };
    const double head = finite(kernel, 0.0, cut, w);
    const double flat = semi_infinite([&](double x) { return b.symmetric(x) / (x * x); }, cut, w);
    const double wave = fourier_tail([&](double x) { return b.symmetric(x) / (x * x); }, cut, t, false, w);
    return 4.0 * (head + flat - wave);
}

} // namespace oracle
