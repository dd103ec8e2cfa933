#include "formeq/grid_kernels.hpp"

#include <omp.h>

namespace formeq {

namespace {

// shared per-point bodies: the OpenMP variants call exactly these, so serial
// and parallel runs produce bitwise-identical fields.

struct PointScratch {
    Mat A, Minv;
};

inline void residual_point(size_t p, const HermField& H, const Mat& omega0,
                           const OperatorContext& ctx, double t_scale,
                           const std::vector<double>& f_t, std::vector<double>& r,
                           std::vector<double>& mineig, std::vector<unsigned char>& flags) {
    Mat A = omega0 + H.at(p);
    double me = min_eigenvalue(hermitian_part(A));
    mineig[p] = me;
    if (me <= 0) {
        flags[p] = 1;
        r[p] = 0;
        return;
    }
    flags[p] = 0;
    Mat Minv = A.inverse();
    double v = 0;
    for (const auto& c : ctx.bundle.comps) v += t_scale * pair_with_chi_power(c, Minv);
    v += f_t[p] / A.determinant().real();
    r[p] = ctx.kappa - v;
}

inline void gradient_point(size_t p, const HermField& H, const Mat& omega0,
                           const OperatorContext& ctx, double t_scale,
                           const std::vector<double>& f_t, HermField& G) {
    Mat A = omega0 + H.at(p);
    Mat Fg = t_scale * F_gradient_reduced(A, ctx);
    Mat Minv = A.inverse();
    Fg -= (f_t[p] / A.determinant().real()) * Minv.transpose();
    G.set(p, Fg);
}

inline void cone_point(size_t p, const HermField& H, const Mat& omega0,
                       const OperatorContext& ctx, double t_scale, std::vector<double>& qmin) {
    const int n = ctx.n();
    Mat A = omega0 + H.at(p);
    FormComponent s = form_power(A, n - 1, ctx.kappa);
    for (const auto& c : ctx.bundle.comps) {
        FormComponent piece = (c.k == n - 1) ? c : wedge(c, form_power(A, n - 1 - c.k));
        piece *= cd(t_scale, 0.0);
        s -= piece;
    }
    qmin[p] = min_eigenvalue(hermitian_part(dual_cone_matrix(s, ctx.bundle.rho)));
}

inline void contract_point(size_t p, const HermField& G, const HermField& V,
                           std::vector<double>& out) {
    const int n = G.n;
    cd s(0);
    const size_t base = p * n * n;
    for (int i = 0; i < n * n; ++i) s += G.v[base + i] * V.v[base + i];
    out[p] = s.real();
}

} // namespace

void residual_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                            double t_scale, const std::vector<double>& f_t,
                            std::vector<double>& r, std::vector<double>& mineig,
                            std::vector<unsigned char>& flags) {
    const size_t P = H.g.points();
    r.resize(P);
    mineig.resize(P);
    flags.resize(P);
    for (size_t p = 0; p < P; ++p) residual_point(p, H, omega0, ctx, t_scale, f_t, r, mineig, flags);
}

void residual_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                         double t_scale, const std::vector<double>& f_t, std::vector<double>& r,
                         std::vector<double>& mineig, std::vector<unsigned char>& flags,
                         int threads) {
    const size_t P = H.g.points();
    r.resize(P);
    mineig.resize(P);
    flags.resize(P);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (long p = 0; p < static_cast<long>(P); ++p)
        residual_point(static_cast<size_t>(p), H, omega0, ctx, t_scale, f_t, r, mineig, flags);
}

void gradient_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                            double t_scale, const std::vector<double>& f_t, HermField& G) {
    const size_t P = H.g.points();
    for (size_t p = 0; p < P; ++p) gradient_point(p, H, omega0, ctx, t_scale, f_t, G);
}

void gradient_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                         double t_scale, const std::vector<double>& f_t, HermField& G,
                         int threads) {
    const size_t P = H.g.points();
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (long p = 0; p < static_cast<long>(P); ++p)
        gradient_point(static_cast<size_t>(p), H, omega0, ctx, t_scale, f_t, G);
}

void cone_kernel_serial(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                        double t_scale, std::vector<double>& qmin) {
    const size_t P = H.g.points();
    qmin.resize(P);
    for (size_t p = 0; p < P; ++p) cone_point(p, H, omega0, ctx, t_scale, qmin);
}

void cone_kernel_omp(const HermField& H, const Mat& omega0, const OperatorContext& ctx,
                     double t_scale, std::vector<double>& qmin, int threads) {
    const size_t P = H.g.points();
    qmin.resize(P);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (long p = 0; p < static_cast<long>(P); ++p)
        cone_point(static_cast<size_t>(p), H, omega0, ctx, t_scale, qmin);
}

void contract_kernel_serial(const HermField& G, const HermField& V, std::vector<double>& out) {
    const size_t P = G.g.points();
    out.resize(P);
    for (size_t p = 0; p < P; ++p) contract_point(p, G, V, out);
}

void contract_kernel_omp(const HermField& G, const HermField& V, std::vector<double>& out,
                         int threads) {
    const size_t P = G.g.points();
    out.resize(P);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (long p = 0; p < static_cast<long>(P); ++p) contract_point(static_cast<size_t>(p), G, V, out);
}

} // namespace formeq
