#pragma once

#include "formeq/torus.hpp"

namespace formeq {

struct DhymInstance {
    int n = 2;
    Mat rho;     // positive definite
    Mat omega0;  // real (1,1) class representative
    double theta = 0;
};

// Global phase from the top coefficient of (omega0 + i rho)^n on the unit
// torus: arccot(Re/Im) placed in (0, pi) by the sign of the imaginary part.
double global_phase(const Mat& omega0, const Mat& rho, int n);

// The reduced bundle: components sin((k-1)theta)/sin(theta) (rho/sin theta)^k/k!
// for k = 2..n-1 plus the density from the k = n term; kappa = 1 convention.
FormBundle lambda_theta_bundle(const Mat& rho, double theta, int n);

struct DhymResiduals {
    double r_direct = 0;   // Re - cot(theta) Im of the top coefficient
    double r_angle = 0;    // sum arccot(lambda_i) - theta
    double r_reduced = 0;  // (exp(omega_hat) ^ (1 - Lambda_theta))^[n] coefficient
    bool reduced_valid = true;
    // cross identities: r_direct == r_reduced, and
    // sin(theta) r_direct + |det W| sin(r_angle) == 0
    double identity_defect = 0;
    double angle_identity_defect = 0;
};

DhymResiduals dhym_residuals(const Mat& omega, const DhymInstance& inst);

struct DhymSolveResult {
    DhymInstance inst;
    TorusProblem reduced;        // the problem actually solved
    RealField u;
    SolveTrace trace;
    double max_angle_defect = 0; // sup_x |sum arccot lambda_i(x) - theta|
    bool supercritical_ok = true;
    bool h1_ok = true;
};

// End-to-end: compute theta, build the reduced torus problem on
// [omega0 - cot(theta) rho], solve, check the angle residual gridwise.
DhymSolveResult dhym_solve(const DhymInstance& inst0, int N, const SolveOptions& opts = {},
                           const RealField* hint = nullptr);

} // namespace formeq
