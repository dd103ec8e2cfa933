// Self-verification: the property suite behind the `verify` subcommand.
// Each check runs a counted batch of randomized instances and records the
// worst observed violation; any failure flips the exit code to 4.
#include <cstdio>
#include <filesystem>
#include <random>

#include "formeq/dhym.hpp"
#include "formeq/functional.hpp"
#include "formeq/json_io.hpp"
#include "formeq/product_lift.hpp"

using namespace formeq;

namespace {

struct Check {
    std::string name;
    long count = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct Suite {
    std::mt19937_64 rng;
    std::vector<Check> checks;

    explicit Suite(std::uint64_t seed) : rng(seed * 0x9e3779b97f4a7c15ull + 1) {}

    void record(const std::string& name, long count, double max_error, double tol) {
        checks.push_back({name, count, max_error, tol, max_error <= tol});
    }

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
};

void check_minor_identity(Suite& s) {
    double worst = 0;
    long count = 0;
    for (int trial = 0; trial < 120; ++trial) {
        int n = 2 + trial % 4;
        Mat A = s.random_pd(n);
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
                    ++count;
                }
        }
    }
    s.record("minor_complement_identity", count, worst, 1e-10);
}

void check_schur(Suite& s) {
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 3 + trial % 3;
        Mat A = s.random_pd(n);
        IndexSet tail = {n - 2, n - 1};
        SchurSplit sp = schur_split(A, tail);
        Mat direct = A.inverse();
        int h = n - 2;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < 2; ++c)
                worst = std::max(worst,
                                 std::abs(sp.inv_tr(r, c) - direct(sp.head[r], sp.tail[c])));
        worst = std::max(worst, (sp.Vhat.inverse() - sp.inv_br).norm());
        // positivity: A^{-1} - diag(0, V^{-1}) is PSD when Hhat > 0
        Mat diff = Mat::Zero(n, n);
        diff.topLeftCorner(h, h) = sp.inv_tl;
        diff.topRightCorner(h, 2) = sp.inv_tr;
        diff.bottomLeftCorner(2, h) = sp.inv_bl;
        diff.bottomRightCorner(2, 2) = sp.inv_br - sp.V.inverse();
        worst = std::max(worst, std::max(0.0, -min_eigenvalue(hermitian_part(diff))));
    }
    s.record("schur_block_inverse", 100, worst, 1e-10);
}

void check_mp_limit(Suite& s) {
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + trial % 3;
        Mat A = s.random_pd(n);
        Mat V = Mat::Zero(n, n);
        int r = 1 + trial % (n == 2 ? 1 : n - 1);
        for (int t = 0; t < r; ++t) {
            Mat g = s.random_complex(n);
            V += g.col(0) * g.col(0).adjoint();
        }
        Mat limit = mp_ray_limit(A, V);
        worst = std::max(worst, ((A + 1e6 * V).inverse() - limit).norm());
    }
    s.record("mp_ray_limit_large_t", 200, worst, 1e-4);
}

void check_sigma(Suite& s) {
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 4;
        Mat A = s.random_herm(n);
        for (int k = 1; k <= n; ++k) {
            double oracle = 0;
            for (const auto& I : subset_table(n, k)) oracle += minor_det(A, I, I).real();
            worst = std::max(worst,
                             std::abs(sigma(A, k) - oracle) / std::max(1.0, std::abs(oracle)));
            Mat T = sigma_linearized(A, k);
            Mat B = s.random_herm(n);
            double h = 1e-6;
            double fd = (sigma(A + h * B, k) - sigma(A - h * B, k)) / (2 * h);
            double lin = (T * B).trace().real();
            worst = std::max(worst, std::abs(lin - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    s.record("sigma_minor_sums_and_linearization", 100, worst, 1e-7);
}

void check_pairing(Suite& s) {
    double worst = 0;
    for (int trial = 0; trial < 150; ++trial) {
        int n = 2 + trial % 3;
        Mat A = s.random_pd(n);
        Mat Minv = A.inverse();
        for (int k = 1; k <= n; ++k) {
            double lhs = pair_with_chi_power(form_power(Mat::Identity(n, n), k), Minv);
            worst = std::max(worst, std::abs(lhs - sigma(Minv, k)));
        }
        int k = 1 + trial % (n == 2 ? 1 : n - 1);
        FormComponent c = s.random_comp(n, k);
        double lhs = pair_with_chi_power(c, Minv);
        double rhs = wedge(c, form_power(A, n - k)).a[0].real() / A.determinant().real();
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    s.record("pairing_vs_wedge_quotient", 150, worst, 1e-9);
}

void check_dual_cone(Suite& s) {
    double worst = 0;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 3;
        FormComponent alpha = s.random_comp(n, n - 1);
        Mat Q = dual_cone_matrix(alpha);
        for (int probe = 0; probe < 20; ++probe) {
            CVec b(n);
            for (int i = 0; i < n; ++i) b(i) = cd(g(s.rng), g(s.rng));
            double direct = wedge(alpha, rank_one_form(b)).a[0].real();
            double quad = (b.adjoint() * Q * b)(0, 0).real();
            worst = std::max(worst, std::abs(direct - quad) / std::max(1.0, std::abs(direct)));
        }
    }
    s.record("dual_cone_wedge", 100 * 20, worst, 1e-10);
}

void check_variations(Suite& s) {
    double worst_g = 0, worst_h = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 3;
        Mat A = s.random_pd(n, 1.0);
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        for (int k = 1; k <= n - 1; ++k) b.add(s.random_comp(n, k));
        b.f = 0.3;
        OperatorContext ctx(b, 1.0);
        Mat B = s.random_herm(n);
        B /= B.norm();
        Mat G = F_gradient(A, ctx);
        double h = 1e-5 * (1.0 + A.norm());
        double lin = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lin += (G(i, j) * B(i, j)).real();
        double fd = (F_value(A + h * B, ctx) - F_value(A - h * B, ctx)) / (2 * h);
        worst_g = std::max(worst_g, std::abs(lin - fd) / std::max(1.0, std::abs(fd)));
        double h2 = 1e-4 * (1.0 + A.norm());
        double q = F_hessian_quadratic(A, ctx, B);
        double fd2 = (F_value(A + h2 * B, ctx) - 2 * F_value(A, ctx) + F_value(A - h2 * B, ctx)) /
                     (h2 * h2);
        worst_h = std::max(worst_h, std::abs(q - fd2) / std::max(1.0, std::abs(fd2)));
    }
    s.record("gradient_finite_difference", 100, worst_g, 1e-6);
    s.record("hessian_finite_difference", 100, worst_h, 1e-5);
}

void check_convexity_monotonicity(Suite& s) {
    double worst_theta = 0, worst_mono = 0;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + trial % 3;
        Mat A = s.random_pd(n);
        int k = 1 + trial % std::max(1, n - 1);
        FormComponent c(n, k);
        for (int t = 0; t < 3; ++t) {
            Mat W = s.random_pd(n, 0.1);
            c += form_power(W, k, std::abs(g(s.rng)));
        }
        Mat B = s.random_complex(n);
        double v = theta_form(A, c, B);
        worst_theta = std::max(worst_theta, std::max(0.0, -v / std::max(1.0, std::abs(v))));

        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        Mat r = s.random_pd(n, 0.4);
        for (int kk = 1; kk <= n - 1; ++kk) b.add(form_power(r, kk, 0.4));
        b.f = 0.2;
        OperatorContext ctx(b, 1.0);
        Mat P = s.random_complex(n);
        Mat Bp = P.col(0) * P.col(0).adjoint();
        double drop = F_value(A, ctx) - F_value(A + Bp, ctx);
        worst_mono = std::max(worst_mono, std::max(0.0, -drop));
    }
    s.record("theta_form_nonnegative", 300, worst_theta, 1e-12);
    s.record("monotone_decreasing", 300, worst_mono, 0.0);
}

void check_prop52(Suite& s) {
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    OperatorContext j2(b, 1.0);
    double band = 0;
    long disagreements = 0;
    for (int ia = 0; ia < 20; ++ia)
        for (int ib = 0; ib < 20; ++ib) {
            double a = 0.5 + 0.1 * ia, bb = 0.5 + 0.1 * ib;
            Mat A = Mat::Zero(2, 2);
            A(0, 0) = a;
            A(1, 1) = bb;
            double P = 1.0 / std::min(a, bb);
            if (std::abs(P - 1.0) <= 1e-7) {
                band += 1;
                continue;
            }
            ConeReport rep = subsolution_check(A, j2, SamplerConfig{128, 2, 12, s.rng()});
            if (rep.pass != (P < 1.0)) ++disagreements;
        }
    s.record("prop52_diagonal_equivalence", 400, double(disagreements), 0.0);
}

void check_plambda_properties(Suite& s) {
    double worst = 0;
    SamplerConfig cfg{256, 0, 0, 4242};
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + trial % 2;
        FormBundle b;
        b.n = n;
        b.rho = Mat::Identity(n, n);
        Mat r = s.random_pd(n, 0.4);
        for (int k = 1; k <= n - 1; ++k) b.add(form_power(r, k, 0.5));
        OperatorContext ctx(b, 1.0);
        Mat A = s.random_pd(n), B = s.random_pd(n);
        double v0 = p_lambda(A, ctx, cfg).value;
        double v1 = p_lambda(B, ctx, cfg).value;
        double vm = p_lambda(0.5 * (A + B), ctx, cfg).value;
        worst = std::max(worst, vm - 0.5 * (v0 + v1));
        Mat g1 = s.random_complex(n);
        worst = std::max(worst, p_lambda(A + g1 * g1.adjoint(), ctx, cfg).value - v0);
        OperatorContext with_f = ctx;
        with_f.bundle.f = 2.0;
        worst = std::max(worst, std::abs(p_lambda(A, with_f, cfg).value - v0));
    }
    s.record("plambda_convex_antitone_ffree", 40 * 3, worst, 1e-9);
}

void check_inequality_suite(Suite& s) {
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + trial % 2;
        Mat A = s.random_pd(n);
        Mat Ap = A;
        Mat g = s.random_complex(n);
        Ap += g * g.adjoint();
        for (int k = 1; k <= n; ++k)
            for (int l = 0; l < k; ++l)
                worst = std::max(worst, sigma(Ap, l) / sigma(Ap, k) - sigma(A, l) / sigma(A, k));
        // block bound on sigma and the linearized operator
        Mat Ablk = Mat::Zero(n, n);
        int d1 = n / 2;
        Ablk.topLeftCorner(d1, d1) = A.topLeftCorner(d1, d1);
        Ablk.bottomRightCorner(n - d1, n - d1) = A.bottomRightCorner(n - d1, n - d1);
        for (int k = 1; k <= n; ++k) {
            worst = std::max(worst, sigma(A, k) - sigma(Ablk, k));
            Mat diff = std::pow(2.0, (k - 1)) * sigma_linearized(Ablk, k) - sigma_linearized(A, k);
            worst = std::max(worst, -min_eigenvalue(hermitian_part(diff)) /
                                        std::max(1.0, diff.norm()));
        }
    }
    s.record("sigma_ratio_and_block_bounds", 200, worst, 1e-9);

    // Newton-Maclaurin normalized bound
    double worst_nm = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + trial % 4;
        Mat G = s.random_complex(d);
        Mat A = G * G.adjoint();
        for (int k = 1; k <= d; ++k) {
            double rhs = binomial(d, k - 1) * std::pow(double(binomial(d, k)), 1.0 / k - 1.0) *
                         std::pow(std::max(sigma(A, k), 0.0), (k - 1.0) / k);
            worst_nm = std::max(worst_nm, (rhs - sigma(A, k - 1)) / std::max(1.0, rhs));
        }
    }
    s.record("newton_maclaurin_bound", 200, worst_nm, 1e-9);
}

void check_splitting_bounds(Suite& s) {
    // hyperplane and full splitting sums under the scalar-matrix cone bound
    double worst = 0;
    std::normal_distribution<double> g(0.0, 1.0);
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
        Mat A = s.random_pd(n, 0.7);
        double amin = min_eigenvalue(hermitian_part(A));
        double kap = 0;
        for (int i = 0; i < split.n_p(); ++i)
            kap += m * binomial(split.d[i], split.k[i]) * std::pow(amin, -split.k[i]);
        kap = std::max(kap * (1 + 1e-9), 1.01 * m);
        CVec bvec(n);
        for (int i = 0; i < n; ++i) bvec(i) = cd(g(s.rng), g(s.rng));
        bvec.normalize();
        Mat chiB = mp_ray_limit(A, Mat(bvec * bvec.adjoint()));
        double hyper = 0;
        for (int i = 0; i < split.n_p(); ++i) {
            Mat rho_i = block_restrict(Mat::Identity(n, n), split.blocks[i]);
            hyper += pair_with_chi_power(form_power(rho_i, split.k[i]), chiB);
        }
        worst = std::max(worst, hyper - kap / m);
        double full = 0;
        for (int i = 0; i < split.n_p(); ++i) {
            Mat rho_i = block_restrict(Mat::Identity(n, n), split.blocks[i]);
            full += pair_with_chi_power(form_power(rho_i, split.k[i]), Mat(A.inverse()));
        }
        worst = std::max(worst, full - n * kap / m);
    }
    s.record("splitting_sum_bounds", 200, worst, 1e-9);
}

void check_lifted_bound(Suite& s) {
    double worst = 0;
    FormBundle fac;
    fac.n = 3;
    fac.rho = Mat::Identity(3, 3);
    fac.add(form_power(fac.rho, 2));
    LiftedInstance inst = lift_bundle(fac, fac.rho, 2);
    long count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Mat H = s.random_pd(3, 0.6), V = s.random_pd(3, 0.6);
        Mat D = 0.25 * s.random_complex(3);
        Mat A = assemble_blocks(H, D, V);
        if (!is_positive_definite(hermitian_part(A))) continue;
        BlockBound bb = block_lower_bound(inst, H, D, V);
        worst = std::max(worst, (bb.rhs - bb.lhs) / std::max(1.0, std::abs(bb.rhs)));
        worst = std::max(worst, structure_defect(inst, H, D, V));
        ++count;
    }
    s.record("lifted_block_lower_bound", count, worst, 1e-10);
}

void check_regmax(Suite& s) {
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::uniform_real_distribution<double> eunif(0.05, 1.5);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int l = 1 + int(s.rng() % 4);
        std::vector<double> t(l), eta(l);
        for (int j = 0; j < l; ++j) {
            t[j] = unif(s.rng);
            eta[j] = eunif(s.rng);
        }
        double m = regularized_max(t, eta);
        double lo = *std::max_element(t.begin(), t.end());
        double hi = -1e300;
        for (int j = 0; j < l; ++j) hi = std::max(hi, t[j] + eta[j]);
        worst = std::max(worst, lo - m);
        worst = std::max(worst, m - hi);
        std::vector<double> ts = t;
        for (auto& x : ts) x += 0.77;
        worst = std::max(worst, std::abs(regularized_max(ts, eta) - m - 0.77));
        std::vector<double> t2 = t, e2 = eta;
        double maxo = -1e300;
        for (int j = 0; j < l; ++j) maxo = std::max(maxo, t[j] - eta[j]);
        t2.push_back(maxo - 2.0 - eta[0]);
        e2.push_back(eta[0]);
        worst = std::max(worst, std::abs(regularized_max(t2, e2) - m));
    }
    s.record("regularized_max_properties", 1000, worst, 1e-12);
}

void check_functional_invariance(Suite& s) {
    GridShape g{2, 8};
    Spectral sp(g);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    RealField zero(g);
    TorusProblem p = manufactured_problem(zero, b, Mat::Identity(2, 2), 2.5, sp);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        RealField phi(g);
        std::vector<size_t> strides = {size_t(8 * 8 * 8), size_t(8 * 8), 8, 1};
        for (size_t q = 0; q < phi.v.size(); ++q) {
            double x = double((q / strides[0]) % 8) / 8.0;
            double y = double((q / strides[1]) % 8) / 8.0;
            phi.v[q] = 0.01 * std::cos(2 * M_PI * x + trial) + 0.008 * std::cos(2 * M_PI * y);
        }
        double base = functional_F(phi, p, sp);
        RealField shifted = phi;
        shifted.shift(gauss(s.rng));
        worst = std::max(worst, std::abs(functional_F(shifted, p, sp) - base));
    }
    s.record("functional_shift_invariance", 10, worst, 1e-10);
}

void check_dhym_identities(Suite& s) {
    std::uniform_real_distribution<double> tdist(0.2, M_PI - 0.2);
    double worst = 0;
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + trial % 2;
        DhymInstance inst;
        inst.n = n;
        inst.rho = s.random_pd(n, 0.4);
        inst.theta = tdist(s.rng);
        DhymResiduals r = dhym_residuals(s.random_herm(n), inst);
        double scale = std::max({1.0, std::abs(r.r_direct), std::abs(r.r_reduced)});
        worst = std::max(worst, r.identity_defect / scale);
        worst = std::max(worst, r.angle_identity_defect / scale);
    }
    s.record("dhym_residual_identities", 300, worst, 1e-10);
}

} // namespace

int run_verify(std::uint64_t seed, const std::string& out_dir) {
    Suite s(seed);
    check_minor_identity(s);
    check_schur(s);
    check_mp_limit(s);
    check_sigma(s);
    check_pairing(s);
    check_dual_cone(s);
    check_variations(s);
    check_convexity_monotonicity(s);
    check_prop52(s);
    check_plambda_properties(s);
    check_inequality_suite(s);
    check_splitting_bounds(s);
    check_lifted_bound(s);
    check_regmax(s);
    check_functional_invariance(s);
    check_dhym_identities(s);

    bool all = true;
    std::printf("%-36s %8s %14s %10s  %s\n", "check", "count", "max_error", "tol", "verdict");
    json report = json::array();
    for (const auto& c : s.checks) {
        all = all && c.pass;
        std::printf("%-36s %8ld %14.3e %10.1e  %s\n", c.name.c_str(), c.count, c.max_error,
                    c.tolerance, c.pass ? "pass" : "FAIL");
        report.push_back({{"name", c.name},
                          {"count", c.count},
                          {"max_error", c.max_error},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    }
    std::printf("verify: %s (seed %llu)\n", all ? "all checks passed" : "FAILURES PRESENT",
                static_cast<unsigned long long>(seed));
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        json top;
        top["seed"] = seed;
        top["pass"] = all;
        top["checks"] = report;
        write_text((std::filesystem::path(out_dir) / "verify_report.json").string(),
                   top.dump(2) + "\n");
    }
    return all ? 0 : 4;
}
