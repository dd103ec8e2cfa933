// Acceptance suite: every shipped criterion at its stated tolerance, one
// pass/fail line each. Exit status is nonzero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <random>

#include "formeq/dhym.hpp"
#include "formeq/functional.hpp"
#include "formeq/grid_kernels.hpp"
#include "formeq/product_lift.hpp"

using namespace formeq;

namespace {

std::mt19937_64 rng(20260808ull);
int failures = 0;

void report(int idx, const char* name, bool pass, double observed, double tol, double secs) {
    std::printf("[%s] criterion %2d: %-44s observed %.3e (tol %.1e) in %.2fs\n",
                pass ? "PASS" : "FAIL", idx, name, observed, tol, secs);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

Mat random_complex(int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cd(g(rng), g(rng));
    return A;
}
Mat random_pd(int n, double shift = 0.5) {
    Mat G = random_complex(n);
    return G * G.adjoint() + shift * Mat::Identity(n, n);
}
Mat random_herm(int n) {
    Mat G = random_complex(n);
    return 0.5 * (G + G.adjoint());
}
FormComponent random_comp(int n, int k) {
    FormComponent c(n, k);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int p = 0; p < c.m(); ++p) {
        c.at(p, p) = cd(g(rng), 0.0);
        for (int q = 0; q < p; ++q) {
            cd v(g(rng), g(rng));
            c.at(p, q) = v;
            c.at(q, p) = std::conj(v);
        }
    }
    return c;
}
FormComponent random_positive_comp(int n, int k, int terms = 3) {
    FormComponent out(n, k);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < terms; ++t) out += form_power(random_pd(n, 0.1), k, std::abs(g(rng)));
    return out;
}

RealField cosine_field(const GridShape& g, const std::vector<std::vector<double>>& ks,
                       const std::vector<double>& amps, const std::vector<double>& phases) {
    RealField u(g);
    const int axes = g.axes();
    std::vector<size_t> strides(axes);
    size_t s = 1;
    for (int a = axes - 1; a >= 0; --a) {
        strides[a] = s;
        s *= g.N;
    }
    for (size_t p = 0; p < g.points(); ++p) {
        double val = 0;
        for (size_t m = 0; m < ks.size(); ++m) {
            double arg = phases[m];
            for (int a = 0; a < axes; ++a)
                arg += 2.0 * M_PI * ks[m][a] * double((p / strides[a]) % g.N) / g.N;
            val += amps[m] * std::cos(arg);
        }
        u.v[p] = val;
    }
    return u;
}

// 1. minor complement identity over all index pairs
void criterion_1() {
    Timer tm;
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + trial % 4;
        Mat A = random_pd(n);
        Mat Minv = A.inverse();
        cd det = A.determinant();
        for (int k = 1; k <= n; ++k) {
            const auto& subs = subset_table(n, k);
            for (const auto& I : subs)
                for (const auto& J : subs) {
                    int sign = concat_complement_sign(I, n) * concat_complement_sign(J, n);
                    cd lhs = double(sign) *
                             minor_det(A, subset_complement(I, n), subset_complement(J, n)) / det;
                    worst = std::max(worst, std::abs(lhs - minor_det(Minv, J, I)));
                }
        }
    }
    double secs = tm.secs();
    report(1, "minor complement identity, 1000 matrices", worst <= 1e-10 && secs < 10.0, worst,
           1e-10, secs);
}

// 2. operator by minor sums vs wedge quotient
void criterion_2() {
    Timer tm;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + trial % 3;
        Mat A = random_pd(n);
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        for (int k = 1; k <= n - 1; ++k) b.add(random_comp(n, k));
        b.f = 0.4;
        OperatorContext ctx(b, 1.0);
        double viaminors = F_value(A, ctx);
        double viawedge = b.f * b.rho.determinant().real();
        for (const auto& c : b.comps) viawedge += wedge(c, form_power(A, n - c.k)).a[0].real();
        viawedge /= A.determinant().real();
        worst = std::max(worst,
                         std::abs(viaminors - viawedge) / std::max(1.0, std::abs(viawedge)));
    }
    report(2, "operator representation, 200 instances", worst <= 1e-9, worst, 1e-9, tm.secs());
}

// 3. first and second variations against central finite differences
void criterion_3() {
    Timer tm;
    double worst_g = 0, worst_h = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 3;
        Mat A = random_pd(n, 1.0);
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        for (int k = 1; k <= n - 1; ++k) b.add(random_comp(n, k));
        b.f = -0.2 + 0.15 * (trial % 5);
        OperatorContext ctx(b, 1.0);
        Mat B = random_herm(n);
        B /= B.norm();
        double h = 1e-5 * (1.0 + A.norm());
        Mat G = F_gradient(A, ctx);
        double lin = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lin += (G(i, j) * B(i, j)).real();
        double fd = (F_value(A + h * B, ctx) - F_value(A - h * B, ctx)) / (2 * h);
        worst_g = std::max(worst_g, std::abs(lin - fd) / std::max(1.0, std::abs(fd)));
        double h2 = 1e-4 * (1.0 + A.norm());
        double q = F_hessian_quadratic(A, ctx, B);
        double fd2 =
            (F_value(A + h2 * B, ctx) - 2 * F_value(A, ctx) + F_value(A - h2 * B, ctx)) / (h2 * h2);
        worst_h = std::max(worst_h, std::abs(q - fd2) / std::max(1.0, std::abs(fd2)));
    }
    bool pass = worst_g <= 1e-6 && worst_h <= 1e-5;
    report(3, "variation formulas vs finite differences", pass, std::max(worst_g, worst_h), 1e-5,
           tm.secs());
}

// 4. convexity form sign and strict monotonicity
void criterion_4() {
    Timer tm;
    double worst_theta = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + trial % 3;
        Mat A = random_pd(n);
        int k = 1 + trial % std::max(1, n - 1);
        FormComponent c = random_positive_comp(n, k);
        Mat B = random_complex(n);
        double v = theta_form(A, c, B);
        worst_theta = std::max(worst_theta, -v / std::max(1.0, std::abs(v)));
    }
    double worst_mono = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 500; ++trial) {
        int n = 2 + trial % 3;
        Mat A = random_pd(n);
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        Mat r = random_pd(n, 0.4);
        for (int k = 1; k <= n - 1; ++k) b.add(form_power(r, k, 0.5));
        b.f = 0.25 * (trial % 3);
        OperatorContext ctx(b, 1.0);
        Mat g = random_complex(n);
        Mat B = g.col(0) * g.col(0).adjoint();
        worst_mono = std::max(worst_mono, F_value(A + B, ctx) - F_value(A, ctx));
    }
    bool pass = worst_theta <= 1e-12 && worst_mono < 0;
    report(4, "convexity form sign and strict monotonicity", pass,
           std::max(worst_theta, worst_mono), 1e-12, tm.secs());
}

// 5. Moore-Penrose ray limit against the large-t inverse
void criterion_5() {
    Timer tm;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + trial % 3;
        Mat A = random_pd(n);
        Mat V = Mat::Zero(n, n);
        int r = 1 + trial % n;
        for (int t = 0; t < r; ++t) {
            Mat g = random_complex(n);
            V += g.col(0) * g.col(0).adjoint();
        }
        if (V.norm() == 0) continue;
        worst = std::max(worst, ((A + 1e6 * V).inverse() - mp_ray_limit(A, V)).norm());
    }
    report(5, "Moore-Penrose ray limit, 200 instances", worst <= 1e-4, worst, 1e-4, tm.secs());
}

// 6. three-way subsolution equivalence on the diagonal family
void criterion_6() {
    Timer tm;
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    OperatorContext j2(b, 1.0);
    long mismatches = 0, marginal = 0;
    for (int ia = 0; ia < 50; ++ia)
        for (int ib = 0; ib < 50; ++ib) {
            double a = 0.52 + 0.03 * ia, bb = 0.52 + 0.03 * ib;
            Mat A = Mat::Zero(2, 2);
            A(0, 0) = a;
            A(1, 1) = bb;
            double P = 1.0 / std::min(a, bb);
            if (std::abs(P - 1.0) <= 1e-7) {
                ++marginal;
                continue;
            }
            bool expect = P < 1.0;
            ConeReport rep = subsolution_check(A, j2, SamplerConfig{96, 2, 10, 33});
            bool rays = true;
            for (int i = 0; i < 2; ++i) {
                Mat B = Mat::Zero(2, 2);
                B(i, i) = 1.0;
                rays = rays && (ray_limit(A, B, j2) < 1.0);
            }
            bool roots_bounded;
            try {
                roots_bounded = subsolution_radius(A, j2, SamplerConfig{64, 2, 8, 33}) < 1e9;
            } catch (const input_error&) {
                roots_bounded = false;
            }
            if (rep.pass != expect || rays != expect || roots_bounded != expect) ++mismatches;
        }
    report(6, "three-way equivalence on the 50x50 diagonal sweep", mismatches == 0,
           double(mismatches), 0.0, tm.secs());
}

// 7. the inequality suite
void criterion_7() {
    Timer tm;
    double worst = 0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    // sigma ratios, restriction, linearized comparison (>= 200 instances)
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + trial % 2;
        Mat A = random_pd(n);
        Mat g = random_complex(n);
        Mat Ap = A + g * g.adjoint();
        for (int k = 1; k <= n; ++k)
            for (int l = 0; l < k; ++l)
                worst = std::max(worst, sigma(Ap, l) / sigma(Ap, k) - sigma(A, l) / sigma(A, k));
        int r = 1 + trial % (n - 1);
        Mat Ah(n - r, n - r);
        for (int i = 0; i < n - r; ++i)
            for (int j = 0; j < n - r; ++j) Ah(i, j) = A(i, j);
        for (int k = r + 1; k <= n; ++k)
            for (int l = r; l < k; ++l)
                worst = std::max(worst,
                                 sigma(Ah, l - r) / sigma(Ah, k - r) - sigma(A, l) / sigma(A, k));
        for (int k = 1; k <= n; ++k)
            for (int rr = k; rr <= n; ++rr) {
                Mat diff = sigma(A, rr - 1) * sigma_linearized(A, k) -
                           sigma(A, k - 1) * sigma_linearized(A, rr);
                worst = std::max(worst,
                                 -min_eigenvalue(hermitian_part(diff)) / std::max(1.0, diff.norm()));
            }
    }
    // block bounds (6.14), (6.15)
    for (int trial = 0; trial < 200; ++trial) {
        int n = 4;
        Mat G = random_complex(n);
        Mat A = G * G.adjoint();
        Mat Ablk = Mat::Zero(n, n);
        Ablk.topLeftCorner(2, 2) = A.topLeftCorner(2, 2);
        Ablk.bottomRightCorner(2, 2) = A.bottomRightCorner(2, 2);
        for (int k = 1; k <= n; ++k) {
            worst = std::max(worst, sigma(A, k) - sigma(Ablk, k));
            Mat reg = 1e-12 * Mat::Identity(n, n);
            Mat diff = std::pow(2.0, k - 1) * sigma_linearized(Ablk + reg, k) -
                       sigma_linearized(A + reg, k);
            worst = std::max(worst,
                             -min_eigenvalue(hermitian_part(diff)) / std::max(1.0, diff.norm()));
        }
    }
    // splitting sums (6.22), (6.23) under the scalar-matrix cone bound
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + trial % 2;
        SplittingLabel split;
        if (n == 3) {
            split.blocks = {{0, 1}, {2}};
            split.d = {2, 1};
            split.k = {1 + trial % 2, 1};
        } else {
            split.blocks = {{0, 1}, {2, 3}};
            split.d = {2, 2};
            split.k = {1 + trial % 2, 1};
        }
        double m = 0.4;
        Mat A = random_pd(n, 0.7);
        double amin = min_eigenvalue(hermitian_part(A));
        double kap = 0;
        for (int i = 0; i < split.n_p(); ++i)
            kap += m * binomial(split.d[i], split.k[i]) * std::pow(amin, -split.k[i]);
        kap = std::max(kap * (1 + 1e-9), 1.01 * m);
        CVec bvec(n);
        for (int i = 0; i < n; ++i) bvec(i) = cd(gauss(rng), gauss(rng));
        bvec.normalize();
        Mat chiB = mp_ray_limit(A, Mat(bvec * bvec.adjoint()));
        double hyper = 0, full = 0;
        for (int i = 0; i < split.n_p(); ++i) {
            Mat rho_i = block_restrict(Mat::Identity(n, n), split.blocks[i]);
            hyper += pair_with_chi_power(form_power(rho_i, split.k[i]), chiB);
            full += pair_with_chi_power(form_power(rho_i, split.k[i]), Mat(A.inverse()));
        }
        worst = std::max(worst, hyper - kap / m);
        worst = std::max(worst, full - n * kap / m);

        // key gradient lower bound (6.27) on the same instance
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        std::vector<FormComponent> pens;
        for (int i = 0; i < split.n_p(); ++i) {
            FormComponent p = form_power(block_restrict(b.rho, split.blocks[i]), split.k[i], m);
            bool hit = false;
            for (auto& q : pens)
                if (q.k == p.k) {
                    q += p;
                    hit = true;
                }
            if (!hit) pens.push_back(p);
        }
        for (auto& p : pens) b.add(p);
        CVec xi(n);
        for (int i = 0; i < n; ++i) xi(i) = cd(gauss(rng), gauss(rng));
        double lhs = 0;
        for (const auto& c : b.comps) {
            FormComponent probe = rank_one_vector(xi);
            FormComponent vk = (c.k >= 2) ? wedge(vector_power(chiB, c.k - 1), probe) : probe;
            lhs += pair_form_vector(c, vk).real();
        }
        double pairing = std::abs((bvec.adjoint() * xi)(0, 0));
        double nbo = (bvec.adjoint() * A.inverse() * bvec)(0, 0).real();
        double gm = gamma_min(kap / m, split);
        double rhs = m * gm * pairing * pairing / (A.determinant().real() * nbo);
        worst = std::max(worst, rhs - lhs);
    }
    // lifted block lower bound (10.33)
    {
        FormBundle fac;
        fac.n = 3;
        fac.rho = Mat::Identity(3, 3);
        fac.add(form_power(fac.rho, 2));
        LiftedInstance inst = lift_bundle(fac, fac.rho, 2);
        for (int trial = 0; trial < 200; ++trial) {
            Mat H = random_pd(3, 0.6), V = random_pd(3, 0.6);
            Mat D = 0.25 * random_complex(3);
            Mat A = assemble_blocks(H, D, V);
            if (!is_positive_definite(hermitian_part(A))) continue;
            BlockBound bb = block_lower_bound(inst, H, D, V);
            worst = std::max(worst, (bb.rhs - bb.lhs) / std::max(1.0, std::abs(bb.rhs)));
        }
    }
    double secs = tm.secs();
    report(7, "inequality suite (ratios, blocks, splittings, lift)",
           worst <= 1e-9 && secs < 60.0, worst, 1e-9, secs);
}

// 8. manufactured solutions on the torus
void criterion_8() {
    Timer tm;
    double worst = 0;
    int newton_n1 = 0, newton_n2 = 0;
    bool ok = true;
    {
        GridShape g{1, 64};
        Spectral sp(g);
        RealField u_star = cosine_field(g, {{1, 0}, {3, 2}, {0, 4}}, {0.02, 0.002, 0.001},
                                        {0.0, 1.3, 2.1});
        Spectral::project_mean_zero(u_star);
        FormBundle b;
        b.n = 1;
        b.rho = Mat::Identity(1, 1);
        TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(1, 1), 1.0, sp);
        auto [u, trace] = continuity_solve(p, SolveOptions{});
        ok = ok && trace.status == SolveStatus::Converged;
        newton_n1 = trace.total_newton;
        for (size_t q = 0; q < u.v.size(); ++q)
            worst = std::max(worst, std::abs(u.v[q] - u_star.v[q]));
    }
    {
        GridShape g{2, 16};
        Spectral sp(g);
        RealField u_star =
            cosine_field(g, {{1, 0, 0, 0}, {0, 1, 1, 0}, {1, 1, 0, 1}}, {0.01, 0.005, 0.002},
                         {0.2, 1.0, 2.5});
        Spectral::project_mean_zero(u_star);
        FormBundle b;
        b.n = 2;
        b.rho = Mat::Identity(2, 2);
        b.add(form_power(b.rho, 1));
        TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(2, 2), 2.6, sp);
        auto [u, trace] = continuity_solve(p, SolveOptions{});
        ok = ok && trace.status == SolveStatus::Converged;
        newton_n2 = trace.total_newton;
        for (size_t q = 0; q < u.v.size(); ++q)
            worst = std::max(worst, std::abs(u.v[q] - u_star.v[q]));
    }
    double secs = tm.secs();
    ok = ok && worst <= 1e-8 && newton_n1 <= 60 && newton_n2 <= 60 && secs < 300.0;
    std::printf("       criterion  8 detail: newton iterations n=1: %d, n=2: %d\n", newton_n1,
                newton_n2);
    report(8, "manufactured torus solves (n=1 N=64, n=2 N=16)", ok, worst, 1e-8, secs);
}

// 9. dHYM residual consistency and the end-to-end solve
void criterion_9() {
    Timer tm;
    std::uniform_real_distribution<double> tdist(0.15, M_PI - 0.15);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        int n = 2 + trial % 2;
        DhymInstance inst;
        inst.n = n;
        inst.rho = random_pd(n, 0.4);
        inst.theta = tdist(rng);
        DhymResiduals r = dhym_residuals(random_herm(n), inst);
        double scale = std::max({1.0, std::abs(r.r_direct), std::abs(r.r_reduced)});
        worst = std::max(worst, r.identity_defect / scale);
        worst = std::max(worst, r.angle_identity_defect / scale);
    }
    DhymInstance inst;
    inst.n = 2;
    inst.rho = Mat::Identity(2, 2);
    inst.omega0 = Mat::Identity(2, 2);
    GridShape g{2, 16};
    RealField hint = cosine_field(g, {{1, 0, 0, 0}, {0, 1, 1, 0}}, {0.01, 0.006}, {0.0, 0.7});
    Spectral sph(g);
    Spectral::project_mean_zero(hint);
    DhymSolveResult res = dhym_solve(inst, 16, SolveOptions{}, &hint);
    bool ok = worst <= 1e-10 && std::abs(res.inst.theta - M_PI_2) < 1e-12 &&
              res.trace.status == SolveStatus::Converged && res.max_angle_defect <= 1e-7;
    report(9, "dHYM residual identities and end-to-end solve", ok,
           std::max(worst, res.max_angle_defect), 1e-7, tm.secs());
}

// 10. negative control: driven-negative subtorus value exits, restored converges
void criterion_10() {
    Timer tm;
    TorusProblem p;
    p.n = 2;
    p.N = 8;
    p.rho = Mat::Identity(2, 2);
    p.omega0 = Mat::Identity(2, 2);
    p.bundle.n = 2;
    p.bundle.rho = p.rho;
    Mat L = Mat::Zero(2, 2);
    L(0, 0) = 3.0;
    L(1, 1) = 0.05;
    p.bundle.add(matrix_form(L));
    p.f = RealField(p.grid());
    RealField wave = cosine_field(p.grid(), {{1, 0, 0, 0}}, {0.05}, {0.3});
    for (size_t q = 0; q < p.f.v.size(); ++q) p.f.v[q] = -0.2 + wave.v[q];
    p.bundle.f = p.f.mean();
    p.kappa = kappa_from_classes(p);
    bool neg_value = class_positivity_subtorus(p.omega0, p.bundle, p.kappa, {0}) < 0;
    auto [u1, t1] = continuity_solve(p, SolveOptions{});
    bool exited = t1.status == SolveStatus::ConeExit && t1.reached_t < 1.0;

    TorusProblem q = p;
    for (size_t i = 0; i < q.f.v.size(); ++i) q.f.v[i] = 0.2 + wave.v[i];
    q.bundle.f = q.f.mean();
    q.kappa = kappa_from_classes(q);
    bool pos_value = class_positivity_subtorus(q.omega0, q.bundle, q.kappa, {0}) > 0;
    auto [u2, t2] = continuity_solve(q, SolveOptions{});
    bool converged = t2.status == SolveStatus::Converged;
    bool ok = neg_value && exited && pos_value && converged;
    std::printf("       criterion 10 detail: exit at t=%.4f, restored run reached t=%.1f\n",
                t1.reached_t, t2.reached_t);
    report(10, "negative control dichotomy", ok, t1.reached_t, 1.0, tm.secs());
}

// 11. functional invariance, path independence, minimizer, uniqueness
void criterion_11() {
    Timer tm;
    GridShape g{2, 8};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0, 0, 0}, {0, 0, 1, 1}}, {0.01, 0.006}, {0.0, 0.8});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(2, 2), 2.6, sp);

    double worst_shift = 0;
    RealField phi = cosine_field(g, {{1, 0, 1, 0}}, {0.01}, {0.7});
    double base = functional_F(phi, p, sp);
    RealField shifted = phi;
    shifted.shift(2.5);
    worst_shift = std::abs(functional_F(shifted, p, sp) - base);

    // path independence at 64 nodes
    RealField chi = cosine_field(g, {{0, 1, 1, 0}}, {0.008}, {1.1});
    Spectral::project_mean_zero(chi);
    PotentialPath A, B;
    for (int j = 0; j <= 64; ++j) {
        double t = double(j) / 64;
        RealField na(g), nb(g);
        for (size_t q = 0; q < na.v.size(); ++q) {
            na.v[q] = t * phi.v[q];
            nb.v[q] = t * phi.v[q] + t * t * (1.0 - t) * chi.v[q];
        }
        A.nodes.push_back(na);
        A.t.push_back(t);
        B.nodes.push_back(nb);
        B.t.push_back(t);
    }
    double path_diff = path_independence_check(A, B, p, sp);

    auto [u, trace] = continuity_solve(p, SolveOptions{});
    bool conv = trace.status == SolveStatus::Converged;
    double fu = functional_F(u, p, sp);
    bool minimizer = true;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < 20; ++s) {
        RealField v = cosine_field(
            g, {{double(1 + s % 3), double(s % 2), double((s / 2) % 2), double((s / 3) % 2)}},
            {1.0}, {gauss(rng)});
        Spectral::project_mean_zero(v);
        RealField pert = u;
        for (size_t q = 0; q < u.v.size(); ++q) pert.v[q] += 1e-2 * v.v[q];
        minimizer = minimizer && functional_F(pert, p, sp) >= fu - 1e-12;
    }

    RealField hint = cosine_field(g, {{0, 1, 0, 0}}, {0.01}, {0.3});
    Spectral::project_mean_zero(hint);
    auto [u2, trace2] = continuity_solve(p, SolveOptions{}, &hint);
    double gauge_diff = 0;
    for (size_t q = 0; q < u.v.size(); ++q)
        gauge_diff = std::max(gauge_diff, std::abs(u.v[q] - u2.v[q]));

    bool ok = worst_shift <= 1e-10 && path_diff <= 1e-7 && conv && minimizer &&
              trace2.status == SolveStatus::Converged && gauge_diff <= 1e-8;
    report(11, "functional invariances, minimizer, uniqueness", ok,
           std::max({worst_shift, path_diff, gauge_diff}), 1e-7, tm.secs());
}

// 12. regularized maximum properties and the gluing audit
void criterion_12() {
    Timer tm;
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_real_distribution<double> eunif(0.05, 1.5);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int l = 1 + int(rng() % 4);
        std::vector<double> t(l), eta(l);
        for (int j = 0; j < l; ++j) {
            t[j] = unif(rng);
            eta[j] = eunif(rng);
        }
        double m = regularized_max(t, eta);
        double lo = *std::max_element(t.begin(), t.end());
        double hi = -1e300;
        for (int j = 0; j < l; ++j) hi = std::max(hi, t[j] + eta[j]);
        worst = std::max(worst, lo - m);
        worst = std::max(worst, m - hi);
        std::vector<double> ts = t;
        for (auto& x : ts) x += 1.1;
        worst = std::max(worst, std::abs(regularized_max(ts, eta) - m - 1.1));
        std::vector<double> t2 = t, e2 = eta;
        double maxo = -1e300;
        for (int j = 0; j < l; ++j) maxo = std::max(maxo, t[j] - eta[j]);
        t2.push_back(maxo - 2.0 - eta[0]);
        e2.push_back(eta[0]);
        worst = std::max(worst, std::abs(regularized_max(t2, e2) - m));
    }

    GridShape g{2, 16};
    Spectral sp(g);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    RealField zero(g);
    TorusProblem p = manufactured_problem(zero, b, Mat::Identity(2, 2), 2.6, sp);
    const size_t P = g.points();
    std::vector<size_t> strides(4);
    size_t st = 1;
    for (int a = 3; a >= 0; --a) {
        strides[a] = st;
        st *= g.N;
    }
    const double eta = 0.008, amp = 0.012;
    RealField u1(g), u2(g);
    std::vector<unsigned char> m1(P, 0), m2(P, 0);
    for (size_t q = 0; q < P; ++q) {
        double x = double((q / strides[0]) % g.N) / g.N;
        double c = std::cos(2 * M_PI * x);
        u1.v[q] = amp * c;
        u2.v[q] = -amp * c;
        if (c >= -0.85) m1[q] = 1;
        if (c <= 0.85) m2[q] = 1;
    }
    GlueResult glue = glue_subsolutions({{u1, m1, eta}, {u2, m2, eta}}, p, sp);
    OperatorContext ctx = p.context();
    double min_inputs = std::numeric_limits<double>::infinity();
    std::vector<const RealField*> us = {&u1, &u2};
    std::vector<const std::vector<unsigned char>*> ms = {&m1, &m2};
    for (int i = 0; i < 2; ++i) {
        HermField H = sp.complex_hessian(*us[i]);
        std::vector<double> qm;
        cone_kernel_serial(H, p.omega0, ctx, 1.0, qm);
        for (size_t q = 0; q < qm.size(); ++q)
            if ((*ms[i])[q]) min_inputs = std::min(min_inputs, qm[q]);
    }
    bool ok = worst <= 1e-12 && glue.ok && glue.q_min >= min_inputs - 1e-8;
    report(12, "regularized max properties and gluing audit", ok, worst, 1e-12, tm.secs());
}

} // namespace

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    Timer total;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("acceptance: %d of 12 criteria passed in %.1fs\n", 12 - failures, total.secs());
    return failures == 0 ? 0 : 1;
}
