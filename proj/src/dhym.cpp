#include "formeq/dhym.hpp"

#include "formeq/cone.hpp"

namespace formeq {

namespace {

cd top_coefficient(const Mat& W) {
    IndexSet full(W.rows());
    for (int i = 0; i < W.rows(); ++i) full[i] = i;
    return minor_det(W, full, full);  // (W-form)^n/n! top coefficient
}

} // namespace

double global_phase(const Mat& omega0, const Mat& rho, int n) {
    if (omega0.rows() != n || rho.rows() != n) throw input_error("global_phase: dims");
    cd Z = top_coefficient(omega0 + cd(0, 1) * rho);
    if (std::abs(Z.imag()) < 1e-14 * std::max(1.0, std::abs(Z)))
        throw model_error("global_phase: degenerate phase (Im = 0)");
    double theta = M_PI_2 - std::atan(Z.real() / Z.imag());  // arccot in (0, pi)
    if (Z.imag() < 0) theta += M_PI;                         // placed by the sign of Im
    return theta;
}

FormBundle lambda_theta_bundle(const Mat& rho, double theta, int n) {
    if (!(theta > 0) || !(theta < M_PI)) throw input_error("lambda_theta_bundle: theta not in (0,pi)");
    double s = std::sin(theta);
    FormBundle b;
    b.n = n;
    b.rho = rho;
    Mat scaled = rho / s;
    for (int k = 2; k <= n - 1; ++k)
        b.add(form_power(scaled, k, std::sin((k - 1) * theta) / s));
    // k = n term as the density against rho^n/n!: (rho/sin)^n = rho^n / sin^n
    b.f = std::sin((n - 1) * theta) / std::pow(s, n + 1);
    return b;
}

DhymResiduals dhym_residuals(const Mat& omega, const DhymInstance& inst) {
    DhymResiduals out;
    const int n = inst.n;
    const double theta = inst.theta;
    double cot = std::cos(theta) / std::sin(theta);
    cd Z = top_coefficient(omega + cd(0, 1) * inst.rho);
    out.r_direct = Z.real() - cot * Z.imag();

    // eigenvalues of omega with respect to rho
    Eigen::SelfAdjointEigenSolver<Mat> rs(inst.rho);
    Mat ris = rs.operatorInverseSqrt();
    Eigen::SelfAdjointEigenSolver<Mat> es(ris * omega * ris);
    double phase_sum = 0;
    for (int i = 0; i < n; ++i) {
        double lam = es.eigenvalues()(i);
        phase_sum += M_PI_2 - std::atan(lam);  // arccot in (0, pi)
    }
    out.r_angle = phase_sum - theta;

    Mat omega_hat = omega - cot * inst.rho;
    FormBundle lt = lambda_theta_bundle(inst.rho, theta, n);
    out.reduced_valid = is_positive_definite(hermitian_part(omega_hat));
    // (exp(omega_hat) ^ (1 - Lambda_theta))^[n] top coefficient; valid as
    // algebra for any omega_hat, flagged when omega_hat is not Kahler
    double red = top_coefficient(omega_hat).real();
    red -= lt.f * inst.rho.determinant().real();
    for (const auto& c : lt.comps) red -= wedge(c, form_power(omega_hat, n - c.k)).a[0].real();
    out.r_reduced = red;

    out.identity_defect = std::abs(out.r_direct - out.r_reduced);
    out.angle_identity_defect =
        std::abs(std::sin(theta) * out.r_direct + std::abs(Z) * std::sin(out.r_angle));
    return out;
}

DhymSolveResult dhym_solve(const DhymInstance& inst0, int N, const SolveOptions& opts, const RealField* hint) {
    DhymSolveResult res;
    res.inst = inst0;
    const int n = inst0.n;
    res.inst.theta = global_phase(inst0.omega0, inst0.rho, n);
    res.supercritical_ok = res.inst.theta > 0 && res.inst.theta < M_PI;
    if (!res.supercritical_ok)
        throw model_error("dhym_solve: phase outside the supercritical range");

    double cot = std::cos(res.inst.theta) / std::sin(res.inst.theta);
    Mat omega0_hat = inst0.omega0 - cot * inst0.rho;
    if (!is_positive_definite(hermitian_part(omega0_hat)))
        throw model_error("dhym_solve: omega0 - cot(theta) rho is not Kahler");

    TorusProblem p;
    p.n = n;
    p.N = N;
    p.rho = inst0.rho;
    p.omega0 = omega0_hat;
    p.bundle = lambda_theta_bundle(inst0.rho, res.inst.theta, n);
    p.f = RealField(p.grid());
    for (auto& v : p.f.v) v = p.bundle.f;
    p.kappa = kappa_from_classes(p);  // 1 up to roundoff by the phase normalization

    if (n >= 3) {
        PositivityCheck h1 = check_H1(p.bundle, 1.0, 2, p.kappa, p.omega0, p.bundle.f, 128, 7);
        res.h1_ok = h1.pass;
    } else {
        // n = 2 reduces to the volume-form case: positivity of the density
        res.h1_ok = p.bundle.f > 0;
    }

    auto [u, trace] = continuity_solve(p, opts, hint);
    res.reduced = p;
    res.u = u;
    res.trace = std::move(trace);

    if (res.trace.status == SolveStatus::Converged) {
        Spectral sp(p.grid());
        HermField H = sp.complex_hessian(u);
        DhymInstance point = res.inst;
        for (size_t q = 0; q < p.grid().points(); ++q) {
            // omega = omega_hat + cot * rho at the solved potential
            Mat omega = p.omega0 + H.at(q) + cot * inst0.rho;
            DhymResiduals r = dhym_residuals(omega, point);
            res.max_angle_defect = std::max(res.max_angle_defect, std::abs(r.r_angle));
        }
    }
    return res;
}

} // namespace formeq
