#pragma once

#include "formeq/torus.hpp"

namespace formeq {

// Global functional: grid quadrature of
//   phi * (Lambda - kappa) ^ exp(omega0) ^ sum_k (i ddbar phi)^k/(k+1)!
// evaluated through top coefficients on the unit torus.
double functional_F(const RealField& phi, const TorusProblem& p, Spectral& sp, int threads = 0);

// Same value for a continuity-path datum (t-scaled components, density field f_t).
double functional_value_path(const RealField& phi, const TorusProblem& p, Spectral& sp,
                             double t_scale, const std::vector<double>& f_t, int threads = 0);

// Path integral of phidot against Lambda ^ exp(omega_phi) over given nodes
// (composite trapezoid in t).
struct PotentialPath {
    std::vector<RealField> nodes;  // phi(t_j), phi(0) = 0
    std::vector<double> t;         // strictly increasing, t.front()=0, t.back()=1
};
double path_integral_F1(const PotentialPath& path, const TorusProblem& p, Spectral& sp);

// Straight-path closed evaluation of the same integral (the (exp a - 1)/a form).
double straight_F1(const RealField& phi, const TorusProblem& p, Spectral& sp);

// |F1(pathA) - F1(pathB)| for two paths with common endpoints.
double path_independence_check(const PotentialPath& A, const PotentialPath& B,
                               const TorusProblem& p, Spectral& sp);

// d^2/dt^2 F along the segment (1-t) phi0 + t phi1 at the sampled t values,
// via the dual-cone contraction with the z-gradient of (phi1 - phi0).
std::vector<double> segment_convexity(const RealField& phi0, const RealField& phi1,
                                      const TorusProblem& p, Spectral& sp,
                                      const std::vector<double>& samples);

// Regularized maximum with per-argument slack eta (smooth bump kernel).
double regularized_max(const std::vector<double>& t, const std::vector<double>& eta);

// Gluing of subsolution potentials over masks via the pointwise regularized
// maximum; refuses when the boundary domination hypothesis fails.
struct GlueInput {
    RealField u;
    std::vector<unsigned char> mask;  // 1 inside the patch
    double eta = 0.5;
};
struct GlueResult {
    bool ok = false;
    RealField glued;
    std::vector<size_t> violations;  // boundary points violating domination
    double q_min = 0;                // min cone margin of the glued metric
};
GlueResult glue_subsolutions(const std::vector<GlueInput>& inputs, const TorusProblem& p,
                             Spectral& sp, int threads = 0);

} // namespace formeq
