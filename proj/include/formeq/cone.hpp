#pragma once

#include <cstdint>
#include <optional>

#include "formeq/operator.hpp"

namespace formeq {

struct SamplerConfig {
    int samples = 4096;
    int ascent_from = 8;
    int ascent_steps = 32;
    std::uint64_t seed = 0;
};

// F_Lambda(A : B) = lim_{t->inf} F(A + tB): the degree <= n-1 parts evaluated
// through the compressed inverse; the volume term drops out.
double ray_limit(const Mat& A, const Mat& B, const OperatorContext& ctx);

// Value of <Lambda_red, exp chi_H> on the hyperplane orthogonal to w.
double hyperplane_value(const Mat& A, const CVec& w, const OperatorContext& ctx);

struct PLambdaResult {
    double value = 0.0;       // sampled lower bound of the supremum
    CVec witness;             // maximizing unit covector direction
};

// Approximate sup over hyperplanes of <Lambda_red, exp chi_H>; sampled +
// local ascent, deterministic under the seed.
PLambdaResult p_lambda(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg = {});

struct ConeReport {
    double p_value = 0.0;     // sampled P_Lambda(A)
    double q_min = 0.0;       // min eigenvalue of the dual cone matrix
    bool pass = false;        // q_min > 0
    bool marginal = false;    // |P - kappa| inside the tolerance band
    bool verdicts_agree = true;
    std::optional<CVec> witness_covector;
    std::optional<double> radius_R;
};

// (kappa exp w - Lambda ^ exp w)^[n-1] as a component, for the cone audit.
FormComponent cone_margin_form(const Mat& A, const OperatorContext& ctx);

ConeReport subsolution_check(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg = {});

// Numeric radius R bounding |B| over PSD roots of F(A+B)=kappa found by ray
// searches; inflated x2. Requires A to be a subsolution.
double subsolution_radius(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg = {});

// The explicit combinatorial constant of the splitting, evaluated literally.
double gamma_min(double ratio, const std::vector<int>& d, const std::vector<int>& k);
double gamma_min(double ratio, const SplittingLabel& s);

struct PositivityThresholds {
    double m = 0.0;
    double gamma = 0.0;        // gamma_min(kappa/m, splitting)
    double eps_h1 = 0.0;       // density floor for the H1 family
    double eps_h2prime = 0.0;  // density floor for the H2' family (solver gate)
};

// Both threshold families; the class integrals reduce to top coefficients on
// the unit torus. k0 enters the H1 branch through the trivial splitting.
PositivityThresholds thresholds(const OperatorContext& ctx, const SplittingLabel& split, double m,
                                int k0, const Mat& omega0);
// Enumerating variant: minimum of the H2' floor over candidate splittings.
PositivityThresholds thresholds(const OperatorContext& ctx,
                                const std::vector<SplittingLabel>& splits, double m, int k0,
                                const Mat& omega0);

struct PositivityCheck {
    bool pass = true;
    std::string detail;
    double min_pairing = 0.0;
    int failing_degree = -1;
    int failing_block = -1;
    std::optional<std::vector<cd>> witness;
};

// H1: Lambda^[l] = 0 below k0, Lambda_red - m rho^{k0}/k0! positive in every
// degree, density above -eps_h1.
PositivityCheck check_H1(const FormBundle& bundle, double m, int k0, double kappa,
                         const Mat& omega0, double f_floor, int samples = 256,
                         std::uint64_t seed = 1);

// O-UP: Lambda_red - m sum_i rho_i^{k_i}/k_i! positive in every degree.
PositivityCheck check_OUP(const FormBundle& bundle, const SplittingLabel& split, double m,
                          int samples = 256, std::uint64_t seed = 1);

// [exp a].[kappa - Lambda].[Y] for a coordinate subtorus Y given by an index
// subset; the full torus is the whole index set.
double class_positivity_subtorus(const Mat& omega0, const FormBundle& bundle, double kappa,
                                 const IndexSet& subtorus);

} // namespace formeq
