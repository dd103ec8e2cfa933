#include "formeq/product_lift.hpp"

namespace formeq {

LiftedInstance lift_bundle(const FormBundle& factor, const Mat& rho_hat, int k0) {
    LiftedInstance inst;
    inst.d = factor.n;
    const int d = inst.d, n2 = 2 * d;
    if (2 * d > 6) throw input_error("lift_bundle: 2d > 6 not supported");
    if (factor.f != 0.0) throw input_error("lift_bundle: factor bundle must have no density");
    if (rho_hat.rows() != d) throw input_error("lift_bundle: rho_hat dimension");
    inst.factor = factor;
    inst.rho_hat = rho_hat;

    inst.lifted.n = n2;
    inst.lifted.rho = Mat::Zero(n2, n2);
    inst.lifted.rho.topLeftCorner(d, d) = rho_hat;
    inst.lifted.rho.bottomRightCorner(d, d) = rho_hat;

    // first-factor components embed with unchanged index sets
    for (const auto& c : factor.comps) {
        FormComponent lift(n2, c.k);
        const auto& subs = subset_table(d, c.k);
        for (size_t p = 0; p < subs.size(); ++p)
            for (size_t q = 0; q < subs.size(); ++q) {
                if (c.at(p, q) == cd(0)) continue;
                lift.at(subset_rank(subs[p], n2), subset_rank(subs[q], n2)) = c.at(p, q);
            }
        inst.lifted.add(std::move(lift));
    }
    // second-factor degree-1 part rho_hat/d
    {
        FormComponent* deg1 = nullptr;
        for (auto& c : inst.lifted.comps)
            if (c.k == 1) deg1 = &c;
        FormComponent fresh(n2, 1);
        if (!deg1) {
            inst.lifted.add(fresh);
            deg1 = &inst.lifted.comps.back();
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) deg1->at(d + i, d + j) += rho_hat(i, j) / double(d);
    }

    IndexSet b1(d), b2(d);
    for (int i = 0; i < d; ++i) {
        b1[i] = i;
        b2[i] = d + i;
    }
    inst.label.blocks = {b1, b2};
    inst.label.d = {d, d};
    inst.label.k = {k0, 1};
    inst.label.validate(n2);
    inst.kappa = 2.0;
    return inst;
}

Mat assemble_blocks(const Mat& H, const Mat& D, const Mat& V) {
    const int d = static_cast<int>(H.rows());
    Mat A(2 * d, 2 * d);
    A.topLeftCorner(d, d) = H;
    A.topRightCorner(d, d) = D;
    A.bottomLeftCorner(d, d) = D.adjoint();
    A.bottomRightCorner(d, d) = V;
    return A;
}

double lifted_F1(const LiftedInstance& inst, const Mat& H) {
    Mat Minv = H.inverse();
    double v = 0;
    for (const auto& c : inst.factor.comps) v += pair_with_chi_power(c, Minv);
    return v;
}

double lifted_F2(const LiftedInstance& inst, const Mat& V) {
    return pair_with_chi_power(matrix_form(inst.rho_hat / double(inst.d)), V.inverse());
}

BlockBound block_lower_bound(const LiftedInstance& inst, const Mat& H, const Mat& D,
                             const Mat& V) {
    Eigen::FullPivLU<Mat> luV(V);
    if (!luV.isInvertible()) throw singular_error("block_lower_bound: singular V");
    Mat A = assemble_blocks(H, D, V);
    if (!is_positive_definite(hermitian_part(A)))
        throw input_error("block_lower_bound: assembled matrix not PD");
    BlockBound out;
    Mat Minv = A.inverse();
    for (const auto& c : inst.lifted.comps) out.lhs += pair_with_chi_power(c, Minv);
    Mat Hhat = H - D * luV.inverse() * D.adjoint();
    out.rhs = lifted_F1(inst, Hhat) + lifted_F2(inst, V);
    return out;
}

double structure_defect(const LiftedInstance& inst, const Mat& H, const Mat& D, const Mat& V) {
    const int d = inst.d;
    Mat A = assemble_blocks(H, D, V);
    Mat Minv = A.inverse();
    double full = 0;
    for (const auto& c : inst.lifted.comps) full += pair_with_chi_power(c, Minv);
    // two-term formula: F1 at the Schur complement + Lambda_y against the
    // lower-right block of A^{-1}
    Mat Hhat = H - D * V.inverse() * D.adjoint();
    double two = lifted_F1(inst, Hhat);
    Mat chi_v = Minv.bottomRightCorner(d, d);
    cd s(0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += (inst.rho_hat(i, j) / double(d)) * chi_v(j, i);
    two += s.real();
    return std::abs(full - two);
}

ConeReport lifted_subsolution_check(const LiftedInstance& inst, const Mat& omega_t,
                                    const SamplerConfig& cfg) {
    Mat A = assemble_blocks(omega_t, Mat::Zero(inst.d, inst.d), inst.rho_hat);
    OperatorContext ctx(inst.lifted, inst.kappa);
    return subsolution_check(A, ctx, cfg);
}

double mixed_block_domination(const LiftedInstance& inst, const Mat& V, const Mat& D) {
    const int d = inst.d;
    FormComponent lam_y = matrix_form(inst.rho_hat / double(inst.d));
    FormComponent beta = (d >= 2) ? wedge(lam_y, form_power(V, d - 2)) : lam_y;
    Mat T = dual_cone_matrix(beta);  // Euclidean frame on the second factor
    double c_y = wedge(lam_y, form_power(V, d - 1)).a[0].real();
    Mat G = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            cd s(0);
            for (int j = 0; j < d; ++j)
                for (int l = 0; l < d; ++l) s += T(j, l) * D(i, j) * std::conj(D(k, l));
            G(i, k) = -s;
        }
    Mat Hm = -c_y * D * V.inverse() * D.adjoint();
    return min_eigenvalue(hermitian_part(G - Hm));
}

} // namespace formeq
