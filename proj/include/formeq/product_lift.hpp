#pragma once

#include "formeq/cone.hpp"

namespace formeq {

// Product-lift algebra: a factor bundle on dimension d lifted to 2d, with the
// degree-1 second-factor part rho_hat/d and the canonical splitting label.
struct LiftedInstance {
    int d = 0;
    FormBundle factor;     // the factor-1 data (degrees 1..d-1)
    Mat rho_hat;           // factor reference metric
    FormBundle lifted;     // the assembled 2d-dimensional bundle
    SplittingLabel label;  // {2, (d,d), (k0,1)}
    double kappa = 2.0;
};

LiftedInstance lift_bundle(const FormBundle& factor, const Mat& rho_hat, int k0);

// Assemble the 2d matrix from blocks.
Mat assemble_blocks(const Mat& H, const Mat& D, const Mat& V);

struct BlockBound {
    double lhs = 0;  // F on the lifted bundle at the assembled matrix
    double rhs = 0;  // F1(H - D V^{-1} D^*) + F2(V)
};

// The splitting lower bound: lhs >= rhs, equality iff D = 0.
BlockBound block_lower_bound(const LiftedInstance& inst, const Mat& H, const Mat& D, const Mat& V);

// F on the factor bundle and the second-factor normalization term.
double lifted_F1(const LiftedInstance& inst, const Mat& H);
double lifted_F2(const LiftedInstance& inst, const Mat& V);

// The two-term structure identity of the lifted operator (mixed terms vanish).
double structure_defect(const LiftedInstance& inst, const Mat& H, const Mat& D, const Mat& V);

// Lifted subsolution transfer: blockdiag(omega_t, rho_hat) against the lifted
// bundle with kappa = 2.
ConeReport lifted_subsolution_check(const LiftedInstance& inst, const Mat& omega_t,
                                    const SamplerConfig& cfg = {});

// Mixed-block wedge domination as a PSD statement: the matrix
//   G(T) - H(V) with G from the (d-2) wedge contraction and H from the
// V^{-1} contraction; returns the min eigenvalue of the difference.
double mixed_block_domination(const LiftedInstance& inst, const Mat& V, const Mat& D);

} // namespace formeq
