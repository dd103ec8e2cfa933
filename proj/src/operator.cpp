#include "formeq/operator.hpp"

namespace formeq {

namespace {

Mat checked_inverse(const Mat& A) {
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible())
        throw singular_error("operator: singular A, rcond ~ " + std::to_string(lu.rcond()));
    return lu.inverse();
}

void require_cone_interior(const Mat& A) {
    if (!is_positive_definite(hermitian_part(A)))
        throw singular_error("operator: A not positive definite; use ray-limit pathways");
}

// G^{ab} = <c, chi^{k-1}/(k-1)! ^ 2i d/dzbar^a ^ d/dz^b> for all (a,b): the
// derivative of <c, chi^k/k!> with respect to the inverse-matrix entries.
Mat chi_derivative_pairing(const FormComponent& c, const Mat& Minv) {
    const int n = c.n, k = c.k;
    Mat G = Mat::Zero(n, n);
    const auto& subs = subset_table(n, k);
    IndexSet Icut, Jcut;
    for (size_t p = 0; p < subs.size(); ++p) {
        const IndexSet& I = subs[p];
        for (size_t q = 0; q < subs.size(); ++q) {
            cd lam = c.at(p, q);
            if (lam == cd(0)) continue;
            const IndexSet& J = subs[q];
            for (int bi = 0; bi < k; ++bi) {
                int b = I[bi];
                int sb = (bi % 2 == 0) ? 1 : -1;  // sign of removing position bi
                Icut.clear();
                for (int t = 0; t < k; ++t)
                    if (t != bi) Icut.push_back(I[t]);
                for (int aj = 0; aj < k; ++aj) {
                    int a = J[aj];
                    int sa = (aj % 2 == 0) ? 1 : -1;
                    Jcut.clear();
                    for (int t = 0; t < k; ++t)
                        if (t != aj) Jcut.push_back(J[t]);
                    G(a, b) += double(sb * sa) * lam * minor_det(Minv, Jcut, Icut);
                }
            }
        }
    }
    return G;
}

// d^2/(ds dt) det(S + s X + t Y)|_0 via row replacement.
cd det_bilinear_second(const Mat& S, const Mat& X, const Mat& Y) {
    const int k = static_cast<int>(S.rows());
    if (k == 1) return cd(0);
    cd total(0);
    Mat W = S;
    for (int p = 0; p < k; ++p) {
        W.row(p) = X.row(p);
        for (int q = 0; q < k; ++q) {
            if (q == p) continue;
            Mat W2 = W;
            W2.row(q) = Y.row(q);
            total += W2.determinant();
        }
        W.row(p) = S.row(p);
    }
    return total;
}

cd det_directional_second(const Mat& S, const Mat& Sdot, const Mat& Sddot) {
    const int k = static_cast<int>(S.rows());
    cd total(0);
    // sum over single rows replaced by Sddot
    Mat W = S;
    for (int p = 0; p < k; ++p) {
        W.row(p) = Sddot.row(p);
        total += W.determinant();
        W.row(p) = S.row(p);
    }
    total += det_bilinear_second(S, Sdot, Sdot);
    return total;
}

} // namespace

double F_component_inv(const Mat& Ainv, const FormComponent& c) {
    return pair_with_chi_power(c, Ainv);
}

double F_component(const Mat& A, const FormComponent& c) {
    require_cone_interior(A);
    return F_component_inv(checked_inverse(A), c);
}

double F_value(const Mat& A, const OperatorContext& ctx, double f) {
    require_cone_interior(A);
    Mat Minv = checked_inverse(A);
    double v = 0;
    for (const auto& c : ctx.bundle.comps) v += F_component_inv(Minv, c);
    return v + f / A.determinant().real();
}

double F_value(const Mat& A, const OperatorContext& ctx) {
    return F_value(A, ctx, ctx.bundle.f);
}

Mat F_gradient_reduced(const Mat& A, const OperatorContext& ctx) {
    require_cone_interior(A);
    const int n = ctx.n();
    Mat Minv = checked_inverse(A);
    Mat Fg = Mat::Zero(n, n);
    for (const auto& c : ctx.bundle.comps) {
        Mat G = chi_derivative_pairing(c, Minv);
        // F_k^{ij} = - sum_{ab} Minv(a,i) G(a,b) Minv(j,b)
        Fg -= Minv.transpose() * G * Minv.transpose();
    }
    return Fg;
}

Mat F_gradient(const Mat& A, const OperatorContext& ctx, double f) {
    Mat Fg = F_gradient_reduced(A, ctx);
    Mat Minv = A.inverse();
    double det = A.determinant().real();
    Fg -= (f / det) * Minv.transpose();
    return Fg;
}

Mat F_gradient(const Mat& A, const OperatorContext& ctx) {
    return F_gradient(A, ctx, ctx.bundle.f);
}

double F_second_directional(const Mat& A, const OperatorContext& ctx, const Mat& H, double f) {
    require_cone_interior(A);
    const int n = ctx.n();
    Mat Minv = checked_inverse(A);
    Mat Md = -Minv * H * Minv;              // d/dt (A+tH)^{-1}
    Mat Mdd = 2.0 * Minv * H * Minv * H * Minv;
    double total = 0;
    IndexSet I, J;
    for (const auto& c : ctx.bundle.comps) {
        const auto& subs = subset_table(n, c.k);
        cd acc(0);
        Mat S(c.k, c.k), Sd(c.k, c.k), Sdd(c.k, c.k);
        for (size_t p = 0; p < subs.size(); ++p) {
            for (size_t q = 0; q < subs.size(); ++q) {
                cd lam = c.at(p, q);
                if (lam == cd(0)) continue;
                for (int r = 0; r < c.k; ++r)
                    for (int s = 0; s < c.k; ++s) {
                        S(r, s) = Minv(subs[q][r], subs[p][s]);
                        Sd(r, s) = Md(subs[q][r], subs[p][s]);
                        Sdd(r, s) = Mdd(subs[q][r], subs[p][s]);
                    }
                acc += lam * det_directional_second(S, Sd, Sdd);
            }
        }
        total += acc.real();
    }
    // volume part: d^2/dt^2 (f / det(A + tH))
    double det = A.determinant().real();
    cd tr1 = (Minv * H).trace();
    cd tr2 = (Minv * H * Minv * H).trace();
    total += (f / det) * (tr1 * tr1 + tr2).real();
    return total;
}

double F_hessian_quadratic(const Mat& A, const OperatorContext& ctx, const Mat& B, double f) {
    // For complex B the sesquilinear Hessian splits over the Hermitian parts:
    // Q(B) = D^2F[B^R] + D^2F[B^I].
    Mat R = 0.5 * (B + B.adjoint());
    Mat S = (B - B.adjoint()) / cd(0, 2);
    double v = F_second_directional(A, ctx, R, f);
    if (S.cwiseAbs().maxCoeff() > 0) v += F_second_directional(A, ctx, S, f);
    return v;
}

double F_hessian_quadratic(const Mat& A, const OperatorContext& ctx, const Mat& B) {
    return F_hessian_quadratic(A, ctx, B, ctx.bundle.f);
}

double F_hessian_combined(const Mat& A, const OperatorContext& ctx, const Mat& B, double f) {
    double q = F_hessian_quadratic(A, ctx, B, f);
    Mat Minv = A.inverse();
    Mat Fg = F_gradient(A, ctx, f);
    Mat W = B * Minv * B.adjoint();  // sum_j A^{jr} B_{ij} conj(B_{sr}) at (i,s)
    cd extra(0);
    for (int i = 0; i < ctx.n(); ++i)
        for (int s = 0; s < ctx.n(); ++s) extra += Fg(i, s) * W(i, s);
    return q + extra.real();
}

double F_hessian_combined(const Mat& A, const OperatorContext& ctx, const Mat& B) {
    return F_hessian_combined(A, ctx, B, ctx.bundle.f);
}

double theta_form(const Mat& A, const FormComponent& c, const Mat& B) {
    require_cone_interior(A);
    const int k = c.k;
    Mat Minv = A.inverse();
    Mat C = Minv * B * Minv;
    // the ordering C^* A C (not C A C^*) is the one matching the combined
    // hess-plus-gradient contraction for non-Hermitian B; both agree on
    // Hermitian directions and both are PSD
    Mat D = C.adjoint() * A * C;
    FormComponent xi = matrix_vector(D);
    double val = 0;
    if (k >= 2) {
        FormComponent zz = wedge(matrix_vector(C), matrix_vector(C.adjoint()));
        FormComponent w = (k == 2) ? zz : wedge(vector_power(Minv, k - 2), zz);
        val += pair_form_vector(c, w).real();
        FormComponent wx = wedge(vector_power(Minv, k - 1), xi);
        val += pair_form_vector(c, wx).real();
    } else {
        val += pair_form_vector(c, xi).real();
    }
    return val;
}

} // namespace formeq
