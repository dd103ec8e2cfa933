#pragma once

#include "formeq/forms.hpp"

namespace formeq {

// Pointwise datum of the equation kappa (exp w)^[n] = (Lambda ^ exp w)^[n]:
// the constant-coefficient bundle plus the local density value f.
struct OperatorContext {
    FormBundle bundle;
    double kappa = 1.0;

    OperatorContext() = default;
    OperatorContext(FormBundle b, double kap) : bundle(std::move(b)), kappa(kap) {
        if (!(kappa > 0) || !std::isfinite(kappa)) throw input_error("OperatorContext: kappa <= 0");
    }
    int n() const { return bundle.n; }
};

// F_k(A) for one component: <c, chi^k/k!> evaluated through A^{-1} minors.
double F_component(const Mat& A, const FormComponent& c);
double F_component_inv(const Mat& Ainv, const FormComponent& c);

// F(A) = sum_k F_k(A) + f/det A. Throws singular_error off the cone.
double F_value(const Mat& A, const OperatorContext& ctx);
double F_value(const Mat& A, const OperatorContext& ctx, double f_override);

// Matrix F^{ij} = dF/dA_{ij}, including the volume term -(f/det A) A^{ji}.
Mat F_gradient(const Mat& A, const OperatorContext& ctx);
Mat F_gradient(const Mat& A, const OperatorContext& ctx, double f_override);
// Gradient of the sum of the k <= n-1 parts only (no volume term).
Mat F_gradient_reduced(const Mat& A, const OperatorContext& ctx);

// Pure second variation: sum F^{ij,rs} B_{ij} conj(B_{sr}) for a general
// complex matrix B. Equals d^2/dt^2 F(A + tB) when B is Hermitian.
double F_hessian_quadratic(const Mat& A, const OperatorContext& ctx, const Mat& B);
double F_hessian_quadratic(const Mat& A, const OperatorContext& ctx, const Mat& B,
                           double f_override);

// Combined form sum (F^{ij,rs} + F^{is} A^{jr}) B_{ij} conj(B_{sr}); this is
// the quantity that is nonnegative for positive bundles.
double F_hessian_combined(const Mat& A, const OperatorContext& ctx, const Mat& B);
double F_hessian_combined(const Mat& A, const OperatorContext& ctx, const Mat& B,
                          double f_override);

// Single-component combined form built from the zeta/xi elements; equals the
// hess-plus-gradient combination for that component.
double theta_form(const Mat& A, const FormComponent& c, const Mat& B);

// Exact second directional derivative d^2/dt^2 F(A + tH)|_0 for Hermitian H.
double F_second_directional(const Mat& A, const OperatorContext& ctx, const Mat& H,
                            double f_override);

} // namespace formeq
