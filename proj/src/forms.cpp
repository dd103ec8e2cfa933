#include "formeq/forms.hpp"

#include <array>

namespace formeq {

// all tables up to the supported dimension, built once; lookups are lock-free
const std::vector<IndexSet>& subset_table(int n, int k) {
    static const auto cache = [] {
        std::array<std::array<std::vector<IndexSet>, 9>, 9> c{};
        for (int nn = 0; nn <= 8; ++nn)
            for (int kk = 0; kk <= nn; ++kk) c[nn][kk] = enumerate_subsets(nn, kk);
        return c;
    }();
    if (n < 0 || n > 8 || k < 0 || k > n) throw input_error("subset_table: out of range");
    return cache[n][k];
}

FormComponent form_power(const Mat& W, int k, cd scale) {
    const int n = static_cast<int>(W.rows());
    if (k < 0 || k > n) throw input_error("form_power: k out of range");
    FormComponent out(n, k);
    const auto& subs = subset_table(n, k);
    for (size_t p = 0; p < subs.size(); ++p)
        for (size_t q = 0; q < subs.size(); ++q)
            out.at(p, q) = scale * minor_det(W, subs[p], subs[q]);
    return out;
}

FormComponent form_power(const Mat& W, int k, double scale) {
    return form_power(W, k, cd(scale, 0.0));
}

std::vector<FormComponent> exp_form(const Mat& w, int top) {
    const int n = static_cast<int>(w.rows());
    if (top < 0 || top > n) throw input_error("exp_form: top out of range");
    std::vector<FormComponent> out;
    out.reserve(top + 1);
    for (int k = 0; k <= top; ++k) out.push_back(form_power(w, k));
    return out;
}

FormComponent vector_power(const Mat& M, int k, double scale) {
    const int n = static_cast<int>(M.rows());
    if (k < 0 || k > n) throw input_error("vector_power: k out of range");
    FormComponent out(n, k);
    const auto& subs = subset_table(n, k);
    for (size_t p = 0; p < subs.size(); ++p)
        for (size_t q = 0; q < subs.size(); ++q)
            out.at(p, q) = scale * minor_det(M, subs[q], subs[p]);  // rows J, cols I
    return out;
}

FormComponent rank_one_vector(const CVec& u) {
    const int n = static_cast<int>(u.size());
    FormComponent out(n, 1);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) out.at(b, a) = u(b) * std::conj(u(a));
    return out;
}

FormComponent rank_one_form(const CVec& b) {
    const int n = static_cast<int>(b.size());
    FormComponent out(n, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = b(i) * std::conj(b(j));
    return out;
}

FormComponent matrix_vector(const Mat& C) {
    const int n = static_cast<int>(C.rows());
    FormComponent out(n, 1);
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a) out.at(b, a) = C(a, b);
    return out;
}

FormComponent matrix_form(const Mat& W) {
    const int n = static_cast<int>(W.rows());
    FormComponent out(n, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = W(i, j);
    return out;
}

Mat component_matrix(const FormComponent& c) {
    if (c.k != 1) throw input_error("component_matrix: degree != 1");
    Mat W(c.n, c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) W(i, j) = c.at(i, j);
    return W;
}

FormComponent wedge(const FormComponent& x, const FormComponent& y) {
    if (x.n != y.n) throw input_error("wedge: dimension mismatch");
    const int n = x.n, k = x.k + y.k;
    if (k > n) throw input_error("wedge: degree overflow");
    FormComponent out(n, k);
    const auto& sx = subset_table(n, x.k);
    const auto& sy = subset_table(n, y.k);
    IndexSet mI, mJ;
    for (size_t p = 0; p < sx.size(); ++p) {
        for (size_t r = 0; r < sy.size(); ++r) {
            int s1 = merge_sign(sx[p], sy[r], mI);
            if (s1 == 0) continue;
            int pi = subset_rank(mI, n);
            for (size_t q = 0; q < sx.size(); ++q) {
                cd xv = x.at(p, q);
                if (xv == cd(0)) continue;
                for (size_t s = 0; s < sy.size(); ++s) {
                    cd yv = y.at(r, s);
                    if (yv == cd(0)) continue;
                    int s2 = merge_sign(sx[q], sy[s], mJ);
                    if (s2 == 0) continue;
                    out.at(pi, subset_rank(mJ, n)) += double(s1 * s2) * xv * yv;
                }
            }
        }
    }
    return out;
}

cd pair_form_vector(const FormComponent& c, const FormComponent& v) {
    if (c.n != v.n || c.k != v.k) throw input_error("pair: degree/dimension mismatch");
    cd s(0);
    for (size_t i = 0; i < c.a.size(); ++i) s += c.a[i] * v.a[i];
    return s;
}

double pair_with_chi_power(const FormComponent& c, const Mat& Ainv) {
    if (static_cast<int>(Ainv.rows()) != c.n) throw input_error("pair_with_chi_power: dimension");
    return pair_form_vector(c, vector_power(Ainv, c.k)).real();
}

Mat dual_cone_matrix(const FormComponent& alpha) {
    const int n = alpha.n;
    if (alpha.k != n - 1) throw input_error("dual_cone_matrix: degree != n-1");
    Mat Q = Mat::Zero(n, n);
    const auto& subs = subset_table(n, n - 1);
    // subset missing index i has rank n-1-i in lexicographic order
    std::vector<int> missing(subs.size());
    for (size_t p = 0; p < subs.size(); ++p) missing[p] = subset_rank(subset_complement(subs[p], n), n);
    for (size_t p = 0; p < subs.size(); ++p) {
        int i = subset_complement(subs[p], n)[0];
        int si = ((n - 1 - i) % 2 == 0) ? 1 : -1;  // insert i past n-1-i larger indices
        for (size_t q = 0; q < subs.size(); ++q) {
            int j = subset_complement(subs[q], n)[0];
            int sj = ((n - 1 - j) % 2 == 0) ? 1 : -1;
            Q(j, i) += double(si * sj) * alpha.at(p, q);
        }
    }
    return Q;
}

Mat dual_cone_matrix(const FormComponent& alpha, const Mat& rho) {
    cd dr = (rho.rows() == alpha.n) ? minor_det(rho, subset_table(alpha.n, alpha.n)[0],
                                                subset_table(alpha.n, alpha.n)[0])
                                    : cd(1.0);
    return dual_cone_matrix(alpha) / dr.real();
}

ProbeResult positivity_probe(const FormComponent& c, int samples, std::uint64_t seed) {
    ProbeResult res;
    res.seed = seed;
    const int n = c.n, k = c.k;
    const double tol = 1e-12 * std::max(1.0, c.max_abs());
    if (k == 0) {
        res.exact = true;
        res.min_pairing = c.a.empty() ? 0.0 : c.a[0].real();
        res.pass = res.min_pairing >= -tol;
        return res;
    }
    if (k == 1 || k == n - 1 || k == n) {
        // positivity = strong positivity in these degrees; eigenvalue test is exact
        res.exact = true;
        if (k == n) {
            res.min_pairing = c.a[0].real();
        } else if (k == 1) {
            res.min_pairing = min_eigenvalue(hermitian_part(component_matrix(c)));
        } else {
            res.min_pairing = min_eigenvalue(hermitian_part(dual_cone_matrix(c)));
        }
        res.pass = res.min_pairing >= -tol;
        return res;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    res.min_pairing = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        std::vector<CVec> us(k);
        FormComponent v;
        for (int j = 0; j < k; ++j) {
            CVec u(n);
            for (int i = 0; i < n; ++i) u(i) = cd(gauss(rng), gauss(rng));
            us[j] = u;
            FormComponent r1 = rank_one_vector(u);
            v = (j == 0) ? r1 : wedge(v, r1);
        }
        double val = pair_form_vector(c, v).real();
        if (val < res.min_pairing) res.min_pairing = val;
        if (val < -tol && !res.witness) {
            std::vector<cd> w;
            for (const auto& u : us)
                for (int i = 0; i < n; ++i) w.push_back(u(i));
            res.witness = w;
            res.pass = false;
        }
    }
    return res;
}

void FormBundle::add(FormComponent c) {
    if (c.n != n) throw input_error("FormBundle::add: dimension mismatch");
    if (c.k < 1 || c.k > n - 1) throw input_error("FormBundle::add: degree out of range");
    for (const auto& e : comps)
        if (e.k == c.k) throw input_error("FormBundle::add: duplicate degree");
    comps.push_back(std::move(c));
}

void SplittingLabel::validate(int n) const {
    if (blocks.size() != d.size() || blocks.size() != k.size())
        throw input_error("SplittingLabel: field lengths differ");
    std::vector<int> seen(n, 0);
    int total = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (static_cast<int>(blocks[i].size()) != d[i])
            throw input_error("SplittingLabel: block size != d");
        if (k[i] < 1 || k[i] > d[i]) throw input_error("SplittingLabel: label out of range");
        total += d[i];
        for (int v : blocks[i]) {
            if (v < 0 || v >= n || seen[v]) throw input_error("SplittingLabel: blocks not disjoint");
            seen[v] = 1;
        }
    }
    if (total != n) throw input_error("SplittingLabel: blocks do not exhaust {1..n}");
}

SplittingLabel trivial_splitting(int n, int k0) {
    SplittingLabel s;
    IndexSet all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    s.blocks = {all};
    s.d = {n};
    s.k = {k0};
    return s;
}

Mat block_restrict(const Mat& rho, const IndexSet& block) {
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    for (int r : block)
        for (int c : block) out(r, c) = rho(r, c);
    return out;
}

} // namespace formeq
