// appendix.hpp — Element-wise second-order kernels of the TC2 and TL2 master
// equations in the exciton basis.
//
// Both equations have the form
//   d/dt s_ab = -i w_ab s_ab + sum over terms  weight * K(a_pair, b)
// where s = exp(-i w t) rho is the Schroedinger-picture element, K is either
// the bath correlation G or its conjugate G*, a_pair = (r, c) selects the
// phase w_rc carried by the kernel and b = (p, q) the source element.
//   TC2: K = int_0^t  G(t - tau) exp(i w_rc (t - tau)) s_pq(tau) dtau
//   TL2: K = [int_0^t G(s) exp(i w_rc s) ds] s_pq(t)
// Each display contributes four signed sums over (mu, nu).

#pragma once

#include <vector>

#include "nmbench/model.hpp"

namespace nmbench {

enum class Kernel { correlation, conjugate };

struct KernelTerm {
    int alpha;
    int beta;
    double weight;
    Kernel kernel;
    int phase_row;
    int phase_col;
    int source_row;
    int source_col;

    int target() const { return 2 * alpha + beta; }
    int source() const { return 2 * source_row + source_col; }
};

// Time-convolution (TC2) display; the phase/source pairs follow it verbatim.
inline std::vector<KernelTerm> tc2_kernel_terms(const ExcitonBasis& basis) {
    const auto& A = basis.a_matrix;
    std::vector<KernelTerm> terms;
    for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
            for (int mu = 0; mu < 2; ++mu)
                for (int nu = 0; nu < 2; ++nu) {
                    // + A_{al,nu} A_{mu,be} G(t-tau) e^{i w_{mu,al}(t-tau)} rho_{nu,mu}(tau)
                    terms.push_back({al, be, A(al, nu) * A(mu, be), Kernel::correlation, mu, al, nu, mu});
                    // - A_{al,nu} A_{nu,mu} G(t-tau) e^{i w_{be,nu}(t-tau)} rho_{mu,be}(tau)
                    terms.push_back({al, be, -A(al, nu) * A(nu, mu), Kernel::correlation, be, nu, mu, be});
                    // + A_{al,nu} A_{mu,be} G*(t-tau) e^{i w_{be,nu}(t-tau)} rho_{nu,mu}(tau)
                    terms.push_back({al, be, A(al, nu) * A(mu, be), Kernel::conjugate, be, nu, nu, mu});
                    // - A_{nu,mu} A_{mu,be} G*(t-tau) e^{i w_{mu,al}(t-tau)} rho_{al,nu}(tau)
                    terms.push_back({al, be, -A(nu, mu) * A(mu, be), Kernel::conjugate, mu, al, al, nu});
                }
    return terms;
}

// Time-local (TL2) display; the source element is taken at time t.
inline std::vector<KernelTerm> tl2_kernel_terms(const ExcitonBasis& basis) {
    const auto& A = basis.a_matrix;
    std::vector<KernelTerm> terms;
    for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
            for (int mu = 0; mu < 2; ++mu)
                for (int nu = 0; nu < 2; ++nu) {
                    // + A_{al,nu} A_{mu,be} G e^{i w_{nu,al}(t-tau)} rho_{nu,mu}(t)
                    terms.push_back({al, be, A(al, nu) * A(mu, be), Kernel::correlation, nu, al, nu, mu});
                    // - A_{al,nu} A_{nu,mu} G e^{i w_{mu,nu}(t-tau)} rho_{mu,be}(t)
                    terms.push_back({al, be, -A(al, nu) * A(nu, mu), Kernel::correlation, mu, nu, mu, be});
                    // + A_{al,nu} A_{mu,be} G* e^{i w_{be,mu}(t-tau)} rho_{nu,mu}(t)
                    terms.push_back({al, be, A(al, nu) * A(mu, be), Kernel::conjugate, be, mu, nu, mu});
                    // - A_{nu,mu} A_{mu,be} G* e^{i w_{mu,nu}(t-tau)} rho_{al,nu}(t)
                    terms.push_back({al, be, -A(nu, mu) * A(mu, be), Kernel::conjugate, mu, nu, al, nu});
                }
    return terms;
}

} // namespace nmbench
