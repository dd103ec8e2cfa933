#include "formeq/cone.hpp"

#include <random>

namespace formeq {

namespace {

// Orthonormal basis of the orthogonal complement of w (unit or not).
Mat hyperplane_basis(const CVec& w) {
    const int n = static_cast<int>(w.size());
    Eigen::HouseholderQR<Mat> qr(w);
    Mat Q = qr.householderQ() * Mat::Identity(n, n);
    return Q.rightCols(n - 1);
}

double reduced_value_inv(const Mat& M, const OperatorContext& ctx) {
    double v = 0;
    for (const auto& c : ctx.bundle.comps) v += pair_with_chi_power(c, M);
    return v;
}

CVec random_unit(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec w(n);
    for (int i = 0; i < n; ++i) w(i) = cd(gauss(rng), gauss(rng));
    return w / w.norm();
}

} // namespace

double ray_limit(const Mat& A, const Mat& B, const OperatorContext& ctx) {
    Mat Bh = hermitian_part(B);
    if (frobenius(Bh) == 0.0) throw input_error("ray_limit: B = 0");
    if (!is_positive_semidefinite(Bh)) throw input_error("ray_limit: B not PSD");
    Mat M = mp_ray_limit(A, Bh);
    return reduced_value_inv(M, ctx);
}

double hyperplane_value(const Mat& A, const CVec& w, const OperatorContext& ctx) {
    Mat K = hyperplane_basis(w);
    return reduced_value_inv(compressed_inverse(A, K), ctx);
}

PLambdaResult p_lambda(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg) {
    const int n = ctx.n();
    PLambdaResult out;
    if (n == 1 || ctx.bundle.comps.empty()) {
        // no degree <= n-1 data: every ray limit is 0
        out.value = 0.0;
        out.witness = CVec::Unit(n, 0);
        return out;
    }
    std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ull);
    struct Cand { double v; CVec w; };
    std::vector<Cand> best;
    auto consider = [&](const CVec& w) {
        double v = hyperplane_value(A, w, ctx);
        if (best.size() < static_cast<size_t>(std::max(1, cfg.ascent_from)) ||
            v > best.back().v) {
            best.push_back({v, w});
            std::sort(best.begin(), best.end(), [](const Cand& a, const Cand& b) { return a.v > b.v; });
            if (best.size() > static_cast<size_t>(std::max(1, cfg.ascent_from))) best.pop_back();
        }
    };
    for (int i = 0; i < n; ++i) consider(CVec::Unit(n, i));
    for (int s = 0; s < cfg.samples; ++s) consider(random_unit(rng, n));

    // projected gradient ascent on the unit sphere from the best candidates
    const double h = 1e-5;
    Cand top = best.empty() ? Cand{0.0, CVec::Unit(n, 0)} : best.front();
    for (const auto& c0 : best) {
        CVec w = c0.w;
        double v = c0.v;
        double step = 0.2;
        for (int it = 0; it < cfg.ascent_steps; ++it) {
            CVec grad = CVec::Zero(n);
            for (int i = 0; i < n; ++i) {
                for (int part = 0; part < 2; ++part) {
                    CVec e = CVec::Zero(n);
                    e(i) = (part == 0) ? cd(h, 0) : cd(0, h);
                    double vp = hyperplane_value(A, (w + e).normalized(), ctx);
                    double vm = hyperplane_value(A, (w - e).normalized(), ctx);
                    double g = (vp - vm) / (2 * h);
                    grad(i) += (part == 0) ? cd(g, 0) : cd(0, g);
                }
            }
            grad -= w * w.dot(grad);  // tangent projection
            double gn = grad.norm();
            if (gn < 1e-14) break;
            bool moved = false;
            while (step > 1e-8) {
                CVec wn = (w + step * grad / gn).normalized();
                double vn = hyperplane_value(A, wn, ctx);
                if (vn > v) {
                    w = wn;
                    v = vn;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (v > top.v) top = {v, w};
    }
    out.value = top.v;
    out.witness = top.w;
    return out;
}

FormComponent cone_margin_form(const Mat& A, const OperatorContext& ctx) {
    const int n = ctx.n();
    FormComponent s = form_power(A, n - 1, ctx.kappa);
    for (const auto& c : ctx.bundle.comps) {
        if (c.k == n - 1) {
            FormComponent t = c;
            s -= t;
        } else {
            s -= wedge(c, form_power(A, n - 1 - c.k));
        }
    }
    return s;
}

ConeReport subsolution_check(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg) {
    ConeReport rep;
    FormComponent margin = cone_margin_form(A, ctx);
    rep.q_min = min_eigenvalue(hermitian_part(dual_cone_matrix(margin, ctx.bundle.rho)));
    PLambdaResult pl = p_lambda(A, ctx, cfg);
    rep.p_value = pl.value;
    rep.pass = rep.q_min > 0;
    rep.marginal = std::abs(rep.p_value - ctx.kappa) <= 1e-7;
    if (!rep.pass) rep.witness_covector = pl.witness;
    if (!rep.marginal) rep.verdicts_agree = (rep.p_value < ctx.kappa) == rep.pass;
    return rep;
}

double subsolution_radius(const Mat& A, const OperatorContext& ctx, const SamplerConfig& cfg) {
    const int n = ctx.n();
    ConeReport rep = subsolution_check(A, ctx, cfg);
    if (!rep.pass) throw input_error("subsolution_radius: A is not a subsolution");
    double F0;
    try {
        F0 = F_value(A, ctx);
    } catch (const singular_error&) {
        throw input_error("subsolution_radius: F(A) unavailable");
    }
    if (F0 < ctx.kappa) return 0.0;  // F decreases along PSD rays: no roots
    std::mt19937_64 rng(cfg.seed + 0xabcdefull);
    double tmax = 0.0;
    int dirs = std::max(16, cfg.samples / 64);
    for (int s = 0; s < dirs + n; ++s) {
        CVec b = (s < n) ? CVec(CVec::Unit(n, s)) : random_unit(rng, n);
        Mat B = b * b.adjoint();
        double limit = ray_limit(A, B, ctx);
        if (limit >= ctx.kappa) continue;  // should not happen for subsolutions
        // bracket the root of F(A + tB) = kappa
        double lo = 0.0, hi = 1.0;
        while (F_value(A + hi * B, ctx) > ctx.kappa && hi < 1e12) hi *= 2;
        if (hi >= 1e12) continue;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (F_value(A + mid * B, ctx) > ctx.kappa ? lo : hi) = mid;
        }
        tmax = std::max(tmax, 0.5 * (lo + hi));
    }
    return 2.0 * tmax;
}

double gamma_min(double ratio, const std::vector<int>& d, const std::vector<int>& k) {
    if (!(ratio > 0)) throw input_error("gamma_min: ratio <= 0");
    if (d.size() != k.size() || d.empty()) throw input_error("gamma_min: bad splitting");
    double min_num = std::numeric_limits<double>::infinity();
    double prod = 1.0, max_den = 0.0, sum_ratio = 0.0, exp_sum = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
        if (k[i] < 1 || k[i] > d[i]) throw input_error("gamma_min: label out of range");
        double cdk = static_cast<double>(binomial(d[i], k[i]));
        min_num = std::min(min_num, binomial(d[i], k[i] - 1) * std::pow(cdk, 1.0 / k[i] - 1.0));
        prod *= std::pow(cdk, static_cast<double>(d[i]) / k[i]);
        max_den = std::max(max_den, d[i] * std::pow(cdk, 1.0 / k[i]));
        exp_sum += static_cast<double>(d[i]) / k[i];
        sum_ratio += std::pow(ratio, 1.0 / k[i]);
    }
    return min_num * prod / (max_den * std::pow(ratio, exp_sum) * sum_ratio);
}

double gamma_min(double ratio, const SplittingLabel& s) { return gamma_min(ratio, s.d, s.k); }

PositivityThresholds thresholds(const OperatorContext& ctx, const SplittingLabel& split, double m,
                                int k0, const Mat& omega0) {
    return thresholds(ctx, std::vector<SplittingLabel>{split}, m, k0, omega0);
}

PositivityThresholds thresholds(const OperatorContext& ctx,
                                const std::vector<SplittingLabel>& splits, double m, int k0,
                                const Mat& omega0) {
    if (!(m > 0)) throw input_error("thresholds: m <= 0");
    const int n = ctx.n();
    PositivityThresholds out;
    out.m = m;
    double gmin_h2 = std::numeric_limits<double>::infinity();
    for (const auto& s : splits) {
        s.validate(n);
        gmin_h2 = std::min(gmin_h2, gamma_min(ctx.kappa / m, s));
    }
    out.gamma = gmin_h2;
    // class integrals reduce to top coefficients on the unit torus
    double vol_omega0 = omega0.determinant().real();
    double vol_rho = ctx.bundle.rho.determinant().real();
    double kappa0 = ctx.kappa * vol_omega0 / vol_rho;
    double g_h1 = gamma_min(2.0 * ctx.kappa / m, std::vector<int>{n}, std::vector<int>{k0});
    out.eps_h1 = std::min(m / (4.0 * n + 2.0) * g_h1, ctx.kappa * vol_omega0 / (2.0 * vol_rho));
    out.eps_h2prime = std::min(m / (2.0 * n + 1.0) * gmin_h2, kappa0 / 2.0);
    return out;
}

PositivityCheck check_H1(const FormBundle& bundle, double m, int k0, double kappa,
                         const Mat& omega0, double f_floor, int samples, std::uint64_t seed) {
    PositivityCheck out;
    const int n = bundle.n;
    if (k0 < 1 || k0 > n - 1) throw input_error("check_H1: k0 out of range");
    for (const auto& c : bundle.comps) {
        if (c.k < k0 && c.max_abs() > 1e-14) {
            out.pass = false;
            out.failing_degree = c.k;
            out.detail = "nonzero component below k0";
            return out;
        }
    }
    FormComponent penalty = form_power(bundle.rho, k0, m);
    out.min_pairing = std::numeric_limits<double>::infinity();
    for (int l = k0; l <= n - 1; ++l) {
        const FormComponent* c = bundle.component(l);
        FormComponent diff = c ? *c : FormComponent(n, l);
        if (l == k0) diff -= penalty;
        ProbeResult pr = positivity_probe(diff, samples, seed + l);
        out.min_pairing = std::min(out.min_pairing, pr.min_pairing);
        if (!pr.pass) {
            out.pass = false;
            out.failing_degree = l;
            out.witness = pr.witness;
            out.detail = "uniform positivity fails in degree " + std::to_string(l);
            return out;
        }
    }
    OperatorContext ctx(bundle, kappa);
    PositivityThresholds th = thresholds(ctx, trivial_splitting(n, k0), m, k0, omega0);
    if (!(f_floor > -th.eps_h1)) {
        out.pass = false;
        out.detail = "density floor " + std::to_string(f_floor) + " below -eps_h1 = " +
                     std::to_string(-th.eps_h1);
    }
    return out;
}

PositivityCheck check_OUP(const FormBundle& bundle, const SplittingLabel& split, double m,
                          int samples, std::uint64_t seed) {
    PositivityCheck out;
    const int n = bundle.n;
    split.validate(n);
    // assemble m * sum_i rho_i^{k_i}/k_i! degree by degree
    std::vector<FormComponent> penalty;
    for (int i = 0; i < split.n_p(); ++i) {
        Mat rho_i = block_restrict(bundle.rho, split.blocks[i]);
        FormComponent p = form_power(rho_i, split.k[i], m);
        bool placed = false;
        for (auto& q : penalty)
            if (q.k == p.k) {
                q += p;
                placed = true;
            }
        if (!placed) penalty.push_back(p);
    }
    out.min_pairing = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= n - 1; ++l) {
        const FormComponent* c = bundle.component(l);
        FormComponent diff = c ? *c : FormComponent(n, l);
        for (const auto& q : penalty)
            if (q.k == l) diff -= q;
        bool has_pen = false;
        for (const auto& q : penalty) has_pen = has_pen || (q.k == l && q.max_abs() > 0);
        if (!c && !has_pen) continue;
        ProbeResult pr = positivity_probe(diff, samples, seed + l);
        out.min_pairing = std::min(out.min_pairing, pr.min_pairing);
        if (!pr.pass) {
            out.pass = false;
            out.failing_degree = l;
            for (int i = 0; i < split.n_p(); ++i)
                if (split.k[i] == l) out.failing_block = i;
            out.witness = pr.witness;
            out.detail = "O-UP fails in degree " + std::to_string(l);
            return out;
        }
    }
    return out;
}

double class_positivity_subtorus(const Mat& omega0, const FormBundle& bundle, double kappa,
                                 const IndexSet& subtorus) {
    const int n = bundle.n;
    const int d = static_cast<int>(subtorus.size());
    if (d < 1 || d > n) throw input_error("class_positivity_subtorus: bad dimension");
    for (size_t i = 0; i < subtorus.size(); ++i) {
        if (subtorus[i] < 0 || subtorus[i] >= n) throw input_error("subtorus index out of range");
        if (i > 0 && subtorus[i] <= subtorus[i - 1]) throw input_error("subtorus not increasing");
    }
    // restrict to the coordinate block and evaluate the top coefficient there
    auto restrict = [&](const Mat& W) {
        Mat out(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) out(r, c) = W(subtorus[r], subtorus[c]);
        return out;
    };
    Mat w0 = restrict(omega0);
    IndexSet full(d);
    for (int i = 0; i < d; ++i) full[i] = i;
    double val = kappa * minor_det(w0, full, full).real();
    for (const auto& c : bundle.comps) {
        if (c.k > d) continue;
        // coefficients of the component restricted to the block
        const auto& subs_small = subset_table(d, c.k);
        FormComponent cr(d, c.k);
        for (size_t p = 0; p < subs_small.size(); ++p)
            for (size_t q = 0; q < subs_small.size(); ++q) {
                IndexSet I(c.k), J(c.k);
                for (int t = 0; t < c.k; ++t) {
                    I[t] = subtorus[subs_small[p][t]];
                    J[t] = subtorus[subs_small[q][t]];
                }
                cr.at(p, q) = c.at(subset_rank(I, n), subset_rank(J, n));
            }
        FormComponent top = (c.k == d) ? cr : wedge(cr, form_power(w0, d - c.k));
        val -= top.a[0].real();
    }
    if (d == n) {
        Mat rho_r = restrict(bundle.rho);
        val -= bundle.f * minor_det(rho_r, full, full).real();
    }
    return val;
}

} // namespace formeq
