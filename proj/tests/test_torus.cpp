#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "formeq/functional.hpp"
#include "formeq/torus.hpp"
#include "test_helpers.hpp"

using namespace formeq;
using namespace formeq::testing;

namespace {

std::mt19937_64 rng(31337);

// u(x) = sum of cosine modes over the 2n real axes
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

TorusProblem j_problem(int n, int N, double kappa_scale = 1.0) {
    TorusProblem p;
    p.n = n;
    p.N = N;
    p.rho = Mat::Identity(n, n);
    p.omega0 = Mat::Identity(n, n);
    p.bundle.n = n;
    p.bundle.rho = p.rho;
    if (n >= 2) p.bundle.add(form_power(p.rho, 1, kappa_scale));
    p.f = RealField(p.grid());
    return p;
}

} // namespace

TEST_CASE("complex_hessian: constants, analytic mode, Hermitian symmetry") {
    GridShape g{1, 32};
    Spectral sp(g);
    RealField c(g);
    for (auto& v : c.v) v = 4.2;
    HermField H0 = sp.complex_hessian(c);
    double sup = 0;
    for (const auto& v : H0.v) sup = std::max(sup, std::abs(v));
    CHECK(sup <= 1e-12);

    // n=1, u = eps cos(2 pi x): u_{zz} = -eps pi^2 cos(2 pi x)
    double eps = 0.37;
    RealField u = cosine_field(g, {{1, 0}}, {eps}, {0.0});
    HermField H = sp.complex_hessian(u);
    double err = 0;
    for (int i = 0; i < g.N; ++i) {
        double x = double(i) / g.N;
        double expect = -eps * M_PI * M_PI * std::cos(2 * M_PI * x);
        // row-major (x, y): index i*N + j, value independent of y
        for (int j = 0; j < g.N; ++j)
            err = std::max(err, std::abs(H.v[size_t(i) * g.N + j] - cd(expect, 0)));
    }
    CHECK(err <= 1e-10);

    // random band-limited field in n=2: Hermitian symmetry exact
    GridShape g2{2, 12};
    Spectral sp2(g2);
    RealField u2 = cosine_field(g2, {{1, 0, 2, 0}, {0, 1, 1, 1}, {2, 1, 0, 3}},
                                {0.3, 0.2, 0.1}, {0.4, 1.1, 2.2});
    HermField H2 = sp2.complex_hessian(u2);
    for (size_t p = 0; p < g2.points(); p += 7) {
        Mat A = H2.at(p);
        CHECK((A - A.adjoint()).norm() == 0.0);
    }
}

TEST_CASE("z_gradient: analytic check") {
    GridShape g{1, 32};
    Spectral sp(g);
    // u = cos(2 pi x): du/dz = (1/2)(d/dx - i d/dy) u = -pi sin(2 pi x)
    RealField u = cosine_field(g, {{1, 0}}, {1.0}, {0.0});
    auto grads = sp.z_gradient(u);
    double err = 0;
    for (int i = 0; i < g.N; ++i) {
        double x = double(i) / g.N;
        cd expect(-M_PI * std::sin(2 * M_PI * x), 0.0);
        err = std::max(err, std::abs(grads[0][size_t(i) * g.N] - expect));
    }
    CHECK(err <= 1e-11);
}

TEST_CASE("kappa_from_classes: hand values and quadrature oracle") {
    TorusProblem p = j_problem(2, 8);
    p.omega0 = 2.0 * Mat::Identity(2, 2);
    CHECK(std::abs(kappa_from_classes(p) - 1.0) <= 1e-14);

    // volume-only: kappa = mean(f) det rho / det omega0
    TorusProblem v;
    v.n = 2;
    v.N = 8;
    v.rho = Mat::Identity(2, 2);
    v.omega0 = Mat::Identity(2, 2);
    v.bundle.n = 2;
    v.bundle.rho = v.rho;
    v.f = RealField(v.grid());
    for (auto& x : v.f.v) x = 3.0;
    CHECK(std::abs(kappa_from_classes(v) - 3.0) <= 1e-14);

    // random constant data: grid quadrature of both sides of the normalization
    for (int trial = 0; trial < 10; ++trial) {
        TorusProblem q;
        q.n = 2;
        q.N = 6;
        q.rho = random_pd(rng, 2, 0.5);
        q.omega0 = random_pd(rng, 2, 0.5);
        q.bundle.n = 2;
        q.bundle.rho = q.rho;
        q.bundle.add(random_positive_component(rng, 2, 1, 2));
        q.f = RealField(q.grid());
        std::uniform_real_distribution<double> unif(0.1, 1.0);
        double fc = unif(rng);
        for (auto& x : q.f.v) x = fc;
        q.bundle.f = fc;
        double kap = kappa_from_classes(q);
        // oracle: grid sums of the top coefficients of both sides
        double lhs = kap * q.omega0.determinant().real();
        double rhs = fc * q.rho.determinant().real();
        for (const auto& c : q.bundle.comps)
            rhs += wedge(c, form_power(q.omega0, q.n - c.k)).a[0].real();
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("solve_ray: closed forms and re-evaluation") {
    // J-equation n=2: F(diag(1+t,1+t)) = 2/(1+t) = 1 at t = 1
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    OperatorContext ctx(b, 1.0);
    auto t = solve_ray(Mat::Identity(2, 2), Mat::Identity(2, 2), ctx);
    REQUIRE(t.has_value());
    CHECK(std::abs(*t - 1.0) <= 1e-12);

    // kappa above F(A0): no root along increasing rays
    OperatorContext big(b, 5.0);
    CHECK_FALSE(solve_ray(Mat::Identity(2, 2), Mat::Identity(2, 2), big).has_value());

    for (int trial = 0; trial < 20; ++trial) {
        Mat A0 = random_pd(rng, 2, 0.2);
        Mat B = random_psd_rank(rng, 2, 1 + trial % 2);
        OperatorContext c2(b, 1.0);
        if (F_value(A0, c2) < 1.0) continue;
        auto root = solve_ray(A0, B, c2);
        if (!root) continue;
        CHECK(std::abs(F_value(A0 + *root * hermitian_part(B), c2) - 1.0) <= 1e-12);
    }
}

TEST_CASE("manufactured_problem: residual vanishes by construction") {
    GridShape g{2, 12};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0, 0, 0}, {0, 1, 1, 0}}, {0.02, 0.01}, {0.3, 1.7});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(2, 2), 1.0, sp);
    ResidualField r = residual(u_star, p, sp);
    CHECK(r.r.sup() <= 1e-12);
    CHECK(r.invalid_points == 0);
    CHECK_NOTHROW(p.validate());

    // u* = 0 gives a constant density
    RealField zero(g);
    TorusProblem p0 = manufactured_problem(zero, b, Mat::Identity(2, 2), 1.0, sp);
    double dev = 0;
    for (double v : p0.f.v) dev = std::max(dev, std::abs(v - p0.f.v[0]));
    CHECK(dev <= 1e-14);

    // residual grows linearly under small perturbations
    RealField pert = cosine_field(g, {{0, 0, 1, 1}}, {1.0}, {0.9});
    double r1, r2;
    {
        RealField up = u_star;
        for (size_t q = 0; q < up.v.size(); ++q) up.v[q] += 1e-5 * pert.v[q];
        r1 = residual(up, p, sp).r.sup();
        for (size_t q = 0; q < up.v.size(); ++q) up.v[q] += 1e-5 * pert.v[q];
        r2 = residual(up, p, sp).r.sup();
    }
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.02));

    // non-Kahler u* is rejected
    RealField huge = cosine_field(g, {{1, 0, 0, 0}}, {5.0}, {0.0});
    CHECK_THROWS_AS(manufactured_problem(huge, b, Mat::Identity(2, 2), 1.0, sp), input_error);
}

TEST_CASE("continuity_solve: t=0 volume normalization is exact with zero iterations") {
    TorusProblem p = j_problem(2, 8);
    p.kappa = kappa_from_classes(p);
    SolveOptions opts;
    auto [u, trace] = continuity_solve(p, opts);
    CHECK(trace.status == SolveStatus::Converged);
    CHECK(trace.steps.front().newton_iters == 0);
    CHECK(u.sup() <= 1e-10);
}

TEST_CASE("continuity_solve: manufactured n=1 solution recovered") {
    GridShape g{1, 32};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0}, {2, 1}}, {0.02, 0.004}, {0.0, 1.3});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 1;
    b.rho = Mat::Identity(1, 1);
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(1, 1), 1.0, sp);
    auto [u, trace] = continuity_solve(p, SolveOptions{});
    REQUIRE(trace.status == SolveStatus::Converged);
    double err = 0;
    for (size_t q = 0; q < u.v.size(); ++q) err = std::max(err, std::abs(u.v[q] - u_star.v[q]));
    CHECK(err <= 1e-8);
}

TEST_CASE("continuity_solve: manufactured n=2 J-equation, gauge-matched recovery") {
    GridShape g{2, 12};
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
    for (double v : p.f.v) REQUIRE(v > 0);  // density stays positive: H2' holds
    auto [u, trace] = continuity_solve(p, SolveOptions{});
    REQUIRE(trace.status == SolveStatus::Converged);
    double err = 0;
    for (size_t q = 0; q < u.v.size(); ++q) err = std::max(err, std::abs(u.v[q] - u_star.v[q]));
    CHECK(err <= 1e-8);
    // the cone margin stayed positive along the path
    for (const auto& s : trace.steps) CHECK(s.q_min > 0);
}

TEST_CASE("continuity_solve: gauge uniqueness from different initializations") {
    GridShape g{2, 8};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0, 0, 0}, {0, 0, 1, 1}}, {0.01, 0.006}, {0.0, 0.8});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(2, 2), 2.6, sp);
    auto [u1, t1] = continuity_solve(p, SolveOptions{});
    RealField hint = cosine_field(g, {{0, 1, 0, 0}}, {0.01}, {0.3});
    Spectral::project_mean_zero(hint);
    auto [u2, t2] = continuity_solve(p, SolveOptions{}, &hint);
    REQUIRE(t1.status == SolveStatus::Converged);
    REQUIRE(t2.status == SolveStatus::Converged);
    double diff = 0;
    for (size_t q = 0; q < u1.v.size(); ++q) diff = std::max(diff, std::abs(u1.v[q] - u2.v[q]));
    CHECK(diff <= 1e-8);
}

TEST_CASE("continuity_solve: manufactured n=3 mixed-degree instance") {
    GridShape g{3, 6};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 1, 0}},
                                    {0.01, 0.006}, {0.3, 1.2});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 3;
    b.rho = Mat::Identity(3, 3);
    b.add(form_power(b.rho, 1, 0.5));
    b.add(form_power(b.rho, 2, 1.0));
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(3, 3), 6.0, sp);
    for (double v : p.f.v) REQUIRE(v > 0);
    // interior path problems carry a small aliasing-level consistency floor;
    // 1e-10 clears it at this resolution while recovery stays far inside 1e-8
    SolveOptions n3opts;
    n3opts.tol = 1e-10;
    auto [u, trace] = continuity_solve(p, n3opts);
    REQUIRE(trace.status == SolveStatus::Converged);
    CHECK(trace.warnings.empty());
    double err = 0;
    for (size_t q = 0; q < u.v.size(); ++q) err = std::max(err, std::abs(u.v[q] - u_star.v[q]));
    CHECK(err <= 1e-8);
}

TEST_CASE("continuity_solve: negative subtorus value exits the cone before t=1") {
    // diag(3, 0.05) data with f = -0.2: the {0}-line value is negative and the
    // path loses the cone margin near t = kappa/3
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
    for (auto& v : p.f.v) v = -0.2;
    p.bundle.f = -0.2;
    p.kappa = kappa_from_classes(p);
    CHECK(class_positivity_subtorus(p.omega0, p.bundle, p.kappa, {0}) < 0);
    auto [u, trace] = continuity_solve(p, SolveOptions{});
    CHECK(trace.status == SolveStatus::ConeExit);
    CHECK(trace.reached_t < 1.0);
    // the margin for this family dies at t = kappa/3
    CHECK(trace.reached_t == doctest::Approx(p.kappa / 3.0).epsilon(1e-2));

    // restoring the value converges
    TorusProblem q = p;
    for (auto& v : q.f.v) v = 0.2;
    q.bundle.f = 0.2;
    q.kappa = kappa_from_classes(q);
    CHECK(class_positivity_subtorus(q.omega0, q.bundle, q.kappa, {0}) > 0);
    auto [u2, trace2] = continuity_solve(q, SolveOptions{});
    CHECK(trace2.status == SolveStatus::Converged);
}

TEST_CASE("every solved grid point passes the subsolution audit") {
    GridShape g{2, 8};
    Spectral sp(g);
    RealField u_star = cosine_field(g, {{1, 0, 0, 0}}, {0.01}, {0.4});
    Spectral::project_mean_zero(u_star);
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(2, 2), 2.6, sp);
    auto [u, trace] = continuity_solve(p, SolveOptions{});
    REQUIRE(trace.status == SolveStatus::Converged);
    HermField H = sp.complex_hessian(u);
    OperatorContext ctx = p.context();
    for (size_t q = 0; q < g.points(); q += 97) {
        Mat A = p.omega0 + H.at(q);
        ConeReport rep = subsolution_check(A, ctx, SamplerConfig{96, 2, 6, 11});
        CHECK(rep.pass);
    }
}

TEST_CASE("kappa_from_classes: nonpositive normalization is a model error") {
    TorusProblem p;
    p.n = 2;
    p.N = 4;
    p.rho = Mat::Identity(2, 2);
    p.omega0 = Mat::Identity(2, 2);
    p.bundle.n = 2;
    p.bundle.rho = p.rho;
    p.f = RealField(p.grid());
    for (auto& v : p.f.v) v = -1.0;  // pure negative volume data
    p.bundle.f = -1.0;
    CHECK_THROWS_AS(kappa_from_classes(p), model_error);
}

TEST_CASE("solve_ray: non-monotone bracket with negative density") {
    // F(t) = 2/(1+t) + f/(1+t)^2 with f = -3 rises from -1, crosses small
    // kappa on the ascending branch, then decays
    FormBundle b;
    b.n = 2;
    b.rho = Mat::Identity(2, 2);
    b.add(form_power(b.rho, 1));
    b.f = -3.0;
    OperatorContext ctx(b, 0.2);
    Mat A0 = Mat::Identity(2, 2);
    REQUIRE(F_value(A0, ctx) < ctx.kappa);
    auto t = solve_ray(A0, Mat::Identity(2, 2), ctx);
    REQUIRE(t.has_value());
    CHECK(std::abs(F_value(A0 + *t * Mat::Identity(2, 2), ctx) - ctx.kappa) <= 1e-9);
}

TEST_CASE("doubling the resolution leaves band-limited recovery unchanged") {
    FormBundle b;
    b.n = 1;
    b.rho = Mat::Identity(1, 1);
    double errs[2];
    int idx = 0;
    for (int N : {16, 32}) {
        GridShape g{1, N};
        Spectral sp(g);
        RealField u_star = cosine_field(g, {{1, 0}, {2, 1}}, {0.02, 0.004}, {0.0, 1.3});
        Spectral::project_mean_zero(u_star);
        TorusProblem p = manufactured_problem(u_star, b, Mat::Identity(1, 1), 1.0, sp);
        auto [u, trace] = continuity_solve(p, SolveOptions{});
        REQUIRE(trace.status == SolveStatus::Converged);
        double err = 0;
        for (size_t q = 0; q < u.v.size(); ++q)
            err = std::max(err, std::abs(u.v[q] - u_star.v[q]));
        errs[idx++] = err;
    }
    CHECK(std::abs(errs[0] - errs[1]) <= 1e-9);
}

TEST_CASE("monitor_estimates and h2 report") {
    GridShape g{1, 16};
    Spectral sp(g);
    TorusProblem p = j_problem(1, 16);
    for (auto& v : p.f.v) v = 1.0;
    p.bundle.f = 1.0;
    p.kappa = kappa_from_classes(p);
    RealField zero(g);
    MonitorReport rep = monitor_estimates(zero, p, sp, 10.0, 0.1);
    CHECK(rep.sup_u == 0.0);
    CHECK(rep.sup_hess == 0.0);
    CHECK(rep.points_above == 0);
    H2DerivativeReport h2 = h2_derivative_report(p, sp);
    CHECK(h2.sup_grad_f <= 1e-12);

    RealField wavy = cosine_field(g, {{1, 0}}, {0.3}, {0.0});
    for (size_t i = 0; i < p.f.v.size(); ++i) p.f.v[i] = 1.0 + wavy.v[i];
    H2DerivativeReport h2b = h2_derivative_report(p, sp);
    CHECK(h2b.sup_grad_f > 0.1);
}
