#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "formeq/linalg.hpp"

namespace formeq {

// Coefficient tensor of a real (k,k)-form over ordered index-set pairs, in the
// normalization  Lambda^[k] = (i^{k^2}/2^k) sum_{|I|=|J|=k} c_{I,Jbar} dz^I ^ dzbar^J.
// The same container holds (k,k)-vectors: there entry (I,J) is the coefficient
// attached to 2^k i^{k^2} d/dzbar^J ^ d/dz^I, so the canonical pairing of a
// form with a vector is the plain entrywise sum of products.
struct FormComponent {
    int n = 0;
    int k = 0;
    std::vector<cd> a;  // dense, a[p*m + q] with p = rank(I), q = rank(J), m = C(n,k)

    FormComponent() = default;
    FormComponent(int n_, int k_) : n(n_), k(k_), a(binomial(n_, k_) * binomial(n_, k_), cd(0)) {}

    int m() const { return static_cast<int>(binomial(n, k)); }
    cd& at(int p, int q) { return a[static_cast<size_t>(p) * m() + q]; }
    const cd& at(int p, int q) const { return a[static_cast<size_t>(p) * m() + q]; }

    FormComponent& operator+=(const FormComponent& o) {
        for (size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }
    FormComponent& operator-=(const FormComponent& o) {
        for (size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
        return *this;
    }
    FormComponent& operator*=(cd s) {
        for (auto& v : a) v *= s;
        return *this;
    }
    double max_abs() const {
        double r = 0;
        for (const auto& v : a) r = std::max(r, std::abs(v));
        return r;
    }
    // Reality defect: max |c_{I,J} - conj(c_{J,I})|.
    double reality_defect() const {
        double r = 0;
        for (int p = 0; p < m(); ++p)
            for (int q = 0; q < m(); ++q) r = std::max(r, std::abs(at(p, q) - std::conj(at(q, p))));
        return r;
    }
};

inline FormComponent operator*(cd s, FormComponent c) { c *= s; return c; }
inline FormComponent operator+(FormComponent x, const FormComponent& y) { x += y; return x; }
inline FormComponent operator-(FormComponent x, const FormComponent& y) { x -= y; return x; }

// Cached subset tables per (n,k).
const std::vector<IndexSet>& subset_table(int n, int k);

// scale * w^k / k! on the form side: entry (I,J) = scale * det W[I x J].
FormComponent form_power(const Mat& W, int k, double scale = 1.0);
FormComponent form_power(const Mat& W, int k, cd scale);

// scale * chi^k / k! on the vector side for chi dual to M: entry (I,J) =
// scale * det M[J x I] (rows J, columns I).
FormComponent vector_power(const Mat& M, int k, double scale = 1.0);

// components w^k/k! for k = 0..top; each is strongly positive when w is PSD.
std::vector<FormComponent> exp_form(const Mat& w, int top);

// Rank-one strongly positive (1,1)-vector 2i (sum conj(u_a) d/dzbar^a) ^ (sum u_b d/dz^b).
FormComponent rank_one_vector(const CVec& u);

// Rank-one (1,1)-form (i/2) b ^ bbar for a covector b: matrix b_i conj(b_j).
FormComponent rank_one_form(const CVec& b);

// (1,1)-vector with general coefficient matrix C (entry (I={b},J={a}) = C(a,b)).
FormComponent matrix_vector(const Mat& C);
// (1,1)-form with coefficient matrix W.
FormComponent matrix_form(const Mat& W);
// Extract the n x n matrix of a degree-1 component.
Mat component_matrix(const FormComponent& c);

// Wedge product in the fixed normalization; works for forms and for vectors.
FormComponent wedge(const FormComponent& x, const FormComponent& y);

// Canonical pairing <form, vector> of equal degree.
cd pair_form_vector(const FormComponent& c, const FormComponent& v);

// <c, chi^k/k!> for chi dual to Ainv: the minor-sum evaluation.
double pair_with_chi_power(const FormComponent& c, const Mat& Ainv);

// Hermitian matrix Q with  alpha ^ (i/2) b ^ bbar = (b^* Q b) rho^n/n!  for a
// degree (n-1, n-1) component alpha.
Mat dual_cone_matrix(const FormComponent& alpha, const Mat& rho);
Mat dual_cone_matrix(const FormComponent& alpha);  // Euclidean frame (rho = I)

struct ProbeResult {
    bool pass = true;
    bool exact = false;  // k in {1, n-1, n}: eigenvalue test, not sampling
    double min_pairing = 0.0;
    std::uint64_t seed = 0;  // recorded so probe runs are reproducible
    std::optional<std::vector<cd>> witness;  // flattened k x n vectors of a failing probe
};

// Positivity probe against sampled strongly positive decomposable (k,k)-vectors.
ProbeResult positivity_probe(const FormComponent& c, int samples, std::uint64_t seed = 1);

// The bundle datum: components for k = 1..n-1 plus the scalar density f of the
// top part f * rho^n/n!.
struct FormBundle {
    int n = 0;
    Mat rho;                            // reference metric, positive definite
    std::vector<FormComponent> comps;   // distinct degrees, 1 <= k <= n-1
    double f = 0.0;

    const FormComponent* component(int k) const {
        for (const auto& c : comps)
            if (c.k == k) return &c;
        return nullptr;
    }
    void add(FormComponent c);
    double max_abs() const {
        double r = std::abs(f);
        for (const auto& c : comps) r = std::max(r, c.max_abs());
        return r;
    }
};

// Labeled orthogonal splitting: mutually orthogonal coordinate blocks V_i with
// dims d_i and labels k_i, sum d_i = n.
struct SplittingLabel {
    std::vector<IndexSet> blocks;
    std::vector<int> d, k;
    int n_p() const { return static_cast<int>(blocks.size()); }
    void validate(int n) const;
};

SplittingLabel trivial_splitting(int n, int k0);

// rho restricted to a coordinate block (rho_i of the splitting): entries kept
// on block x block, zero elsewhere.
Mat block_restrict(const Mat& rho, const IndexSet& block);

} // namespace formeq
