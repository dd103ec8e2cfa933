#pragma once

#include "formeq/torus.hpp"

namespace formeq {

// Pointwise grid kernels. Each has a serial reference implementation and an
// OpenMP variant running the identical per-point code; outputs are written to
// disjoint slots, so the two are bitwise equal and reported norms never depend
// on the thread count (reductions happen serially afterwards).

struct PointData {
    const OperatorContext* ctx;
    double t_scale = 1.0;  // continuity scaling of the reduced components
};

// residual r(x) = kappa - F(A(x)) with A(x) = omega0 + H(x); flags[x] = 1 for
// non-Kahler points. mineig[x] = min eigenvalue of A(x).
void residual_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                            double t_scale, const std::vector<double>& f_t,
                            std::vector<double>& r, std::vector<double>& mineig,
                            std::vector<unsigned char>& flags);
void residual_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                         double t_scale, const std::vector<double>& f_t, std::vector<double>& r,
                         std::vector<double>& mineig, std::vector<unsigned char>& flags,
                         int threads);

// Gradient field F^{ij}(A(x)) for the Newton linearization.
void gradient_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                            double t_scale, const std::vector<double>& f_t, HermField& G);
void gradient_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                         double t_scale, const std::vector<double>& f_t, HermField& G, int threads);

// Cone audit: q_min(x) of (kappa exp w - t Lambda ^ exp w)^[n-1].
void cone_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                        double t_scale, std::vector<double>& qmin);
void cone_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                     double t_scale, std::vector<double>& qmin, int threads);

// Contraction sum_ij Re(G(x)_{ij} V(x)_{ij}) of two Hermitian fields.
void contract_kernel_serial(const HermField& G, const HermField& V, std::vector<double>& out);
void contract_kernel_omp(const HermField& G, const HermField& V, std::vector<double>& out,
                         int threads);

} // namespace formeq
