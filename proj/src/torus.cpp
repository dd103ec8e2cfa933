#include "formeq/torus.hpp"

#include <fftw3.h>

#include <cstring>

#include "formeq/functional.hpp"
#include "formeq/grid_kernels.hpp"

namespace formeq {

// ---------------------------------------------------------------- Spectral

struct Spectral::Impl {
    GridShape g;
    size_t P;
    std::vector<int> dims;
    fftw_complex *in, *out;
    fftw_plan fwd, bwd;

    explicit Impl(GridShape gs) : g(gs), P(gs.points()), dims(gs.axes(), gs.N) {
        in = fftw_alloc_complex(P);
        out = fftw_alloc_complex(P);
        fwd = fftw_plan_dft(g.axes(), dims.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(g.axes(), dims.data(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Impl() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(in);
        fftw_free(out);
    }

    // signed frequency of one axis index; Nyquist is zeroed (first-derivative
    // factors must be odd in k)
    double freq(int a) const {
        if (2 * a == g.N) return 0.0;
        return (a <= g.N / 2) ? a : a - g.N;
    }
    // magnitude frequency including the Nyquist mode (even in k, so the sign
    // ambiguity does not matter)
    double freq_full(int a) const { return (a <= g.N / 2) ? a : a - g.N; }

    // decompose flat index into per-axis indices (row-major, last fastest)
    void axis_freqs(size_t p, std::vector<double>& k) const {
        const int ax = g.axes();
        for (int a = ax - 1; a >= 0; --a) {
            k[a] = freq(static_cast<int>(p % g.N));
            p /= g.N;
        }
    }
    void axis_freqs_full(size_t p, std::vector<double>& k) const {
        const int ax = g.axes();
        for (int a = ax - 1; a >= 0; --a) {
            k[a] = freq_full(static_cast<int>(p % g.N));
            p /= g.N;
        }
    }

    std::vector<cd> forward(const RealField& u) {
        for (size_t p = 0; p < P; ++p) {
            in[p][0] = u.v[p];
            in[p][1] = 0.0;
        }
        fftw_execute(fwd);
        std::vector<cd> spec(P);
        for (size_t p = 0; p < P; ++p) spec[p] = cd(out[p][0], out[p][1]);
        return spec;
    }

    std::vector<cd> backward(const std::vector<cd>& spec) {
        for (size_t p = 0; p < P; ++p) {
            in[p][0] = spec[p].real();
            in[p][1] = spec[p].imag();
        }
        fftw_execute(bwd);
        std::vector<cd> res(P);
        const double inv = 1.0 / static_cast<double>(P);
        for (size_t p = 0; p < P; ++p) res[p] = cd(out[p][0] * inv, out[p][1] * inv);
        return res;
    }
};

Spectral::Spectral(GridShape g) : grid(g), impl(std::make_unique<Impl>(g)) {}
Spectral::~Spectral() = default;

HermField Spectral::complex_hessian(const RealField& u) {
    const int n = grid.n;
    const size_t P = impl->P;
    HermField H(grid, n);
    std::vector<cd> spec = impl->forward(u);
    std::vector<double> k(grid.axes()), kf(grid.axes());
    std::vector<cd> mult(P);
    const double pi2 = M_PI * M_PI;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (size_t p = 0; p < P; ++p) {
                if (i == j) {
                    // |w_i|^2 = kx^2 + ky^2 is even in k: keep the Nyquist mode
                    impl->axis_freqs_full(p, kf);
                    mult[p] = -pi2 * (kf[i] * kf[i] + kf[n + i] * kf[n + i]) * spec[p];
                } else {
                    impl->axis_freqs(p, k);
                    cd wi(k[i], -k[n + i]);       // w_i = kx_i - i ky_i
                    cd wj_conj(k[j], k[n + j]);   // conj(w_j)
                    mult[p] = -pi2 * wi * wj_conj * spec[p];
                }
            }
            std::vector<cd> field = impl->backward(mult);
            for (size_t p = 0; p < P; ++p) {
                cd v = field[p];
                if (i == j) v = cd(v.real(), 0.0);  // Hermitian by construction
                H.v[p * n * n + i * n + j] = v;
                H.v[p * n * n + j * n + i] = std::conj(v);
            }
        }
    }
    return H;
}

std::vector<std::vector<cd>> Spectral::z_gradient(const RealField& u) {
    const int n = grid.n;
    const size_t P = impl->P;
    std::vector<cd> spec = impl->forward(u);
    std::vector<double> k(grid.axes());
    std::vector<std::vector<cd>> out(n);
    std::vector<cd> mult(P);
    for (int i = 0; i < n; ++i) {
        for (size_t p = 0; p < P; ++p) {
            impl->axis_freqs(p, k);
            cd wi(k[i], -k[n + i]);
            mult[p] = cd(0, M_PI) * wi * spec[p];  // d/dz^i
        }
        out[i] = impl->backward(mult);
    }
    return out;
}

RealField Spectral::solve_frozen(const RealField& rhs, const Mat& C) {
    const int n = grid.n;
    const size_t P = impl->P;
    std::vector<cd> spec = impl->forward(rhs);
    std::vector<double> k(grid.axes());
    const double pi2 = M_PI * M_PI;
    std::vector<double> kf(grid.axes());
    for (size_t p = 0; p < P; ++p) {
        impl->axis_freqs(p, k);
        impl->axis_freqs_full(p, kf);
        cd s(0);
        for (int i = 0; i < n; ++i) {
            s += C(i, i) * (kf[i] * kf[i] + kf[n + i] * kf[n + i]);
            cd wi(k[i], -k[n + i]);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                cd wj(k[j], -k[n + j]);
                s += C(i, j) * wi * std::conj(wj);
            }
        }
        double symbol = -pi2 * s.real();
        spec[p] = (std::abs(symbol) < 1e-300) ? cd(0) : spec[p] / symbol;
    }
    std::vector<cd> field = impl->backward(spec);
    RealField out(grid);
    for (size_t p = 0; p < P; ++p) out.v[p] = field[p].real();
    return out;
}

void Spectral::project_mean_zero(RealField& u) { u.shift(-u.mean()); }

// ------------------------------------------------------------ TorusProblem

void TorusProblem::validate() const {
    if (n < 1 || n > 3) throw input_error("TorusProblem: n out of range 1..3");
    if (N < 4) throw input_error("TorusProblem: N < 4");
    if (n == 3 && N > 8) throw input_error("TorusProblem: n=3 limited to N <= 8");
    if (rho.rows() != n || omega0.rows() != n) throw input_error("TorusProblem: matrix dims");
    if (!is_hermitian(rho) || !is_hermitian(omega0)) throw input_error("TorusProblem: not Hermitian");
    if (!is_positive_definite(rho)) throw input_error("TorusProblem: rho not PD");
    if (!is_positive_definite(omega0)) throw input_error("TorusProblem: omega0 not PD");
    if (bundle.n != n) throw input_error("TorusProblem: bundle dimension");
    if (f.v.size() != grid().points()) throw input_error("TorusProblem: f grid size");
    if (!(kappa > 0)) throw model_error("TorusProblem: kappa <= 0");
    double expect = kappa_from_classes(*this);
    if (std::abs(expect - kappa) > 1e-10 * std::max(1.0, std::abs(kappa)))
        throw model_error("TorusProblem: kappa violates the class normalization (expected " +
                          std::to_string(expect) + ")");
}

double kappa_from_classes(const TorusProblem& p) {
    double det_omega0 = p.omega0.determinant().real();
    double det_rho = p.rho.determinant().real();
    double num = p.f.mean() * det_rho;
    for (const auto& c : p.bundle.comps)
        num += wedge(c, form_power(p.omega0, p.n - c.k)).a[0].real();
    double kap = num / det_omega0;
    if (!(kap > 0)) throw model_error("kappa_from_classes: nonpositive kappa");
    return kap;
}

std::optional<double> solve_ray(const Mat& A0, const Mat& B, const OperatorContext& ctx) {
    Mat Bh = hermitian_part(B);
    if (!is_positive_semidefinite(Bh)) throw input_error("solve_ray: B not PSD");
    auto Fv = [&](double t) { return F_value(A0 + t * Bh, ctx); };
    auto Fd = [&](double t) {
        Mat G = F_gradient(A0 + t * Bh, ctx);
        cd s(0);
        for (int i = 0; i < ctx.n(); ++i)
            for (int j = 0; j < ctx.n(); ++j) s += G(i, j) * Bh(i, j);
        return s.real();
    };
    const double kap = ctx.kappa;
    double F0 = Fv(0.0);
    if (std::abs(F0 - kap) <= 1e-13 * std::max(1.0, kap)) return 0.0;
    double lo = 0.0, hi = -1.0;
    if (F0 > kap) {
        double t = 1.0;
        for (int it = 0; it < 120 && hi < 0; ++it, t *= 2) {
            if (Fv(t) <= kap) hi = t;
            if (t > 1e14) break;
        }
    }
    if (hi < 0 && ctx.bundle.f < 0) {
        // non-monotone bracket possible: scan for the first sign change
        double sign0 = F0 - kap;
        double t_prev = 0.0;
        for (double t = 1.0 / 64; t <= 1e6; t *= 1.25) {
            double s = Fv(t) - kap;
            if (s * sign0 < 0) {
                lo = t_prev;
                hi = t;
                break;
            }
            t_prev = t;
        }
    }
    if (hi < 0) return std::nullopt;
    for (int it = 0; it < 120; ++it) {
        double mid = 0.5 * (lo + hi);
        ((Fv(mid) - kap) * (Fv(lo) - kap) > 0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        double r = Fv(t) - kap;
        if (std::abs(r) <= 1e-12 * std::max(1.0, kap)) break;
        double d = Fd(t);
        if (d == 0) break;
        double tn = t - r / d;
        if (!(tn >= 0) || !std::isfinite(tn)) break;
        t = tn;
    }
    if (std::abs(Fv(t) - kap) > 1e-9 * std::max(1.0, kap)) return std::nullopt;
    return t;
}

ResidualField residual(const RealField& u, const TorusProblem& p, Spectral& sp, int threads) {
    HermField H = sp.complex_hessian(u);
    OperatorContext ctx = p.context();
    ResidualField out;
    out.r = RealField(p.grid());
    std::vector<double> mineig;
    std::vector<unsigned char> flags;
    if (threads > 1)
        residual_kernel_omp(H, p.omega0, ctx, 1.0, p.f.v, out.r.v, mineig, flags, threads);
    else
        residual_kernel_serial(H, p.omega0, ctx, 1.0, p.f.v, out.r.v, mineig, flags);
    out.min_eig = std::numeric_limits<double>::infinity();
    out.invalid_points = 0;
    for (size_t q = 0; q < mineig.size(); ++q) {
        if (mineig[q] < out.min_eig) {
            out.min_eig = mineig[q];
            out.worst_point = q;
        }
        if (flags[q]) ++out.invalid_points;
    }
    return out;
}

TorusProblem manufactured_problem(const RealField& u_star, const FormBundle& bundle,
                                  const Mat& omega0, double kappa, Spectral& sp) {
    TorusProblem p;
    p.n = sp.grid.n;
    p.N = sp.grid.N;
    p.rho = bundle.rho;
    p.omega0 = omega0;
    p.bundle = bundle;
    p.kappa = kappa;
    p.f = RealField(sp.grid);
    HermField H = sp.complex_hessian(u_star);
    double det_rho = p.rho.determinant().real();
    for (size_t q = 0; q < sp.grid.points(); ++q) {
        Mat A = omega0 + H.at(q);
        if (!is_positive_definite(hermitian_part(A)))
            throw input_error("manufactured_problem: u_star leaves the Kahler cone");
        double num = kappa * A.determinant().real();
        for (const auto& c : bundle.comps)
            num -= wedge(c, form_power(A, p.n - c.k)).a[0].real();
        p.f.v[q] = num / det_rho;
    }
    return p;
}

// ----------------------------------------------------------------- solver

namespace {

struct NewtonWork {
    Spectral& sp;
    const TorusProblem& p;
    const SolveOptions& opts;
    OperatorContext ctx;
    std::vector<double> f_t;
    double t_scale = 1.0;

    NewtonWork(Spectral& s, const TorusProblem& prob, const SolveOptions& o)
        : sp(s), p(prob), opts(o), ctx(prob.context()), f_t(prob.f.v.size(), 0.0) {}

    void set_path_point(double t, double kappa0) {
        t_scale = t;
        for (size_t q = 0; q < f_t.size(); ++q) f_t[q] = t * p.f.v[q] + (1.0 - t) * kappa0;
    }

    void fields(const RealField& u, std::vector<double>& r, std::vector<double>& mineig,
                std::vector<unsigned char>& flags) {
        HermField H = sp.complex_hessian(u);
        if (opts.threads > 1)
            residual_kernel_omp(H, p.omega0, ctx, t_scale, f_t, r, mineig, flags, opts.threads);
        else
            residual_kernel_serial(H, p.omega0, ctx, t_scale, f_t, r, mineig, flags);
    }

    double qmin_field(const RealField& u, size_t& argmin) {
        HermField H = sp.complex_hessian(u);
        std::vector<double> qmin;
        if (opts.threads > 1)
            cone_kernel_omp(H, p.omega0, ctx, t_scale, qmin, opts.threads);
        else
            cone_kernel_serial(H, p.omega0, ctx, t_scale, qmin);
        double m = std::numeric_limits<double>::infinity();
        argmin = 0;
        for (size_t q = 0; q < qmin.size(); ++q)
            if (qmin[q] < m) {
                m = qmin[q];
                argmin = q;
            }
        return m;
    }

    // apply the linearization v -> Pi_0 sum_ij G^{ij} v_{ij}
    RealField apply_linearization(const HermField& G, const RealField& v) {
        HermField Hv = sp.complex_hessian(v);
        std::vector<double> out;
        if (opts.threads > 1)
            contract_kernel_omp(G, Hv, out, opts.threads);
        else
            contract_kernel_serial(G, Hv, out);
        RealField res(p.grid());
        res.v = std::move(out);
        Spectral::project_mean_zero(res);
        return res;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Preconditioned BiCGStab for the Newton linear system on mean-zero fields.
bool bicgstab(NewtonWork& w, const HermField& G, const Mat& Cbar, const RealField& rhs,
              RealField& x, double tol, int maxit) {
    const size_t P = rhs.v.size();
    x = RealField(rhs.g);
    auto precond = [&](const RealField& r) {
        RealField z = w.sp.solve_frozen(r, Cbar);
        Spectral::project_mean_zero(z);
        return z;
    };
    RealField r = rhs;
    std::vector<double> rhat = r.v;
    double rho_old = 1, alpha = 1, omega = 1;
    RealField v(rhs.g), pvec(rhs.g);
    double bnorm = norm2(rhs.v);
    if (bnorm == 0) return true;
    for (int it = 0; it < maxit; ++it) {
        double rho = dot(rhat, r.v);
        if (std::abs(rho) < 1e-300) return false;
        double beta = (rho / rho_old) * (alpha / omega);
        for (size_t i = 0; i < P; ++i) pvec.v[i] = r.v[i] + beta * (pvec.v[i] - omega * v.v[i]);
        RealField phat = precond(pvec);
        v = w.apply_linearization(G, phat);
        double denom = dot(rhat, v.v);
        if (std::abs(denom) < 1e-300) return false;
        alpha = rho / denom;
        RealField s(rhs.g);
        for (size_t i = 0; i < P; ++i) s.v[i] = r.v[i] - alpha * v.v[i];
        if (norm2(s.v) <= tol * bnorm) {
            for (size_t i = 0; i < P; ++i) x.v[i] += alpha * phat.v[i];
            return true;
        }
        RealField shat = precond(s);
        RealField t = w.apply_linearization(G, shat);
        double tt = dot(t.v, t.v);
        if (tt < 1e-300) return false;
        omega = dot(t.v, s.v) / tt;
        for (size_t i = 0; i < P; ++i) {
            x.v[i] += alpha * phat.v[i] + omega * shat.v[i];
            r.v[i] = s.v[i] - omega * t.v[i];
        }
        if (norm2(r.v) <= tol * bnorm) return true;
        rho_old = rho;
    }
    return false;
}

struct NewtonResult {
    bool converged = false;
    bool cone_loss = false;
    int iters = 0;
    double residual_sup = 0;
    double min_eig = 0;
    size_t cone_point = 0;
    double q_min = 0;
};

NewtonResult newton_solve(NewtonWork& w, RealField& u) {
    NewtonResult res;
    const size_t P = u.v.size();
    std::vector<double> r, mineig;
    std::vector<unsigned char> flags;
    for (int it = 0; it <= w.opts.max_newton; ++it) {
        w.fields(u, r, mineig, flags);
        long bad = 0;
        double me = std::numeric_limits<double>::infinity();
        for (size_t q = 0; q < P; ++q) {
            me = std::min(me, mineig[q]);
            bad += flags[q];
        }
        res.min_eig = me;
        if (bad > 0) return res;  // left the Kahler cone: caller backtracks in t
        double sup = 0;
        for (size_t q = 0; q < P; ++q) sup = std::max(sup, std::abs(r[q]));
        res.residual_sup = sup;
        size_t cpt;
        double qm = w.qmin_field(u, cpt);
        res.q_min = qm;
        if (qm <= 0) {
            res.cone_loss = true;
            res.cone_point = cpt;
            return res;
        }
        if (sup <= w.opts.tol) {
            res.converged = true;
            return res;
        }
        if (it == w.opts.max_newton) return res;

        // assemble the Newton system at the current iterate
        HermField H = w.sp.complex_hessian(u);
        HermField G(w.p.grid(), w.p.n);
        if (w.opts.threads > 1)
            gradient_kernel_omp(H, w.p.omega0, w.ctx, w.t_scale, w.f_t, G, w.opts.threads);
        else
            gradient_kernel_serial(H, w.p.omega0, w.ctx, w.t_scale, w.f_t, G);
        Mat Cbar = Mat::Zero(w.p.n, w.p.n);
        for (size_t q = 0; q < P; ++q) Cbar += G.at(q);
        Cbar /= static_cast<double>(P);

        RealField rhs(w.p.grid());
        rhs.v = r;
        Spectral::project_mean_zero(rhs);
        RealField step;
        if (!bicgstab(w, G, Cbar, rhs, step, w.opts.krylov_tol, w.opts.krylov_max)) return res;

        // backtracking with the Kahler trust constraint
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-9) {
            RealField u_try = u;
            for (size_t q = 0; q < P; ++q) u_try.v[q] += alpha * step.v[q];
            Spectral::project_mean_zero(u_try);
            std::vector<double> r2, me2;
            std::vector<unsigned char> fl2;
            w.fields(u_try, r2, me2, fl2);
            long bad2 = 0;
            double mineig2 = std::numeric_limits<double>::infinity();
            double sup2 = 0;
            for (size_t q = 0; q < P; ++q) {
                bad2 += fl2[q];
                mineig2 = std::min(mineig2, me2[q]);
                sup2 = std::max(sup2, std::abs(r2[q]));
            }
            if (bad2 == 0 && mineig2 >= 0.1 * me && sup2 <= sup * (1.0 - 0.1 * alpha)) {
                u = u_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++res.iters;
        if (!accepted) return res;
    }
    return res;
}

} // namespace

std::pair<RealField, SolveTrace> continuity_solve(const TorusProblem& p, const SolveOptions& opts,
                                                  const RealField* hint) {
    p.validate();
    Spectral sp(p.grid());
    NewtonWork w(sp, p, opts);
    double kappa0 = p.kappa * p.omega0.determinant().real() / p.rho.determinant().real();

    RealField u = hint ? *hint : RealField(p.grid());
    Spectral::project_mean_zero(u);
    SolveTrace trace;

    // entry gates: recorded, not enforced; a failing gate is the expected
    // prelude to a CONE_EXIT
    {
        ConeReport gate = subsolution_check(p.omega0, w.ctx, SamplerConfig{512, 4, 8, 1});
        if (!gate.pass)
            trace.warnings.push_back("omega0 is not a subsolution of the target data (q_min = " +
                                     std::to_string(gate.q_min) + ")");
        double f_floor = *std::min_element(p.f.v.begin(), p.f.v.end());
        if (f_floor < -0.5 * kappa0)
            trace.warnings.push_back("density floor " + std::to_string(f_floor) +
                                     " is below -kappa0/2 = " + std::to_string(-0.5 * kappa0));
    }

    auto record = [&](double t, const NewtonResult& nr) {
        StepRecord s;
        s.t = t;
        s.newton_iters = nr.iters;
        s.residual_sup = nr.residual_sup;
        s.min_eig = nr.min_eig;
        s.q_min = nr.q_min;
        if (opts.record_functional)
            s.functional = functional_value_path(u, p, sp, w.t_scale, w.f_t, opts.threads);
        trace.steps.push_back(s);
        trace.total_newton += nr.iters;
    };

    // t = 0: pure volume normalization; u = 0 is exact for constant data
    w.set_path_point(0.0, kappa0);
    NewtonResult nr0 = newton_solve(w, u);
    if (nr0.cone_loss) {
        trace.status = SolveStatus::ConeExit;
        trace.exit_point = nr0.cone_point;
        trace.exit_q_min = nr0.q_min;
        trace.reached_t = 0.0;
        trace.message = "cone condition lost at t=0";
        return {u, trace};
    }
    record(0.0, nr0);
    if (!nr0.converged) {
        trace.status = SolveStatus::Stalled;
        trace.message = "Newton failed at t=0";
        return {u, trace};
    }

    double t = 0.0, dt = opts.dt0;
    trace.reached_t = 0.0;
    bool cone_seen = false;
    NewtonResult last_fail;
    while (t < 1.0 - 1e-14) {
        double t_next = std::min(1.0, t + dt);
        RealField u_backup = u;
        w.set_path_point(t_next, kappa0);
        NewtonResult nr = newton_solve(w, u);
        if (nr.converged) {
            t = t_next;
            trace.reached_t = t;
            record(t, nr);
            if (nr.iters <= 4 && dt < 0.25) dt *= 1.5;
            continue;
        }
        // failed step (Newton stagnation or cone loss): halve t and retry so
        // the degeneracy parameter is localized before aborting
        u = u_backup;
        if (nr.cone_loss) {
            cone_seen = true;
            last_fail = nr;
            last_fail.residual_sup = t_next;  // remember the failing parameter
        }
        dt *= 0.5;
        if (dt < opts.dt_floor) {
            w.set_path_point(std::min(1.0, t + dt), kappa0);
            size_t cpt;
            double qmargin = w.qmin_field(u, cpt);
            if (cone_seen || qmargin <= 0.05 * p.kappa) {
                trace.status = SolveStatus::ConeExit;
                trace.exit_point = cone_seen ? last_fail.cone_point : cpt;
                trace.exit_q_min = cone_seen ? last_fail.q_min : qmargin;
                trace.message = "cone condition lost near t=" +
                                std::to_string(cone_seen ? last_fail.residual_sup : t + dt);
            } else {
                trace.status = SolveStatus::Stalled;
                trace.message = "step floor reached at t=" + std::to_string(t + dt);
            }
            return {u, trace};
        }
    }
    trace.status = SolveStatus::Converged;
    trace.reached_t = 1.0;
    return {u, trace};
}

MonitorReport monitor_estimates(const RealField& u, const TorusProblem& p, Spectral& sp,
                                double grad_threshold, double mu, int threads) {
    MonitorReport rep;
    rep.grad_threshold = grad_threshold;
    rep.mu = mu;
    rep.sup_u = u.sup();
    HermField H = sp.complex_hessian(u);
    OperatorContext ctx = p.context();
    Mat rho_inv_sqrt;
    {
        Eigen::SelfAdjointEigenSolver<Mat> es(p.rho);
        rho_inv_sqrt = es.operatorInverseSqrt();
    }
    rep.min_margin = std::numeric_limits<double>::infinity();
    const size_t P = p.grid().points();
    for (size_t q = 0; q < P; ++q) {
        Mat Hq = H.at(q);
        double norm_rho = (rho_inv_sqrt * Hq * rho_inv_sqrt).norm();
        rep.sup_hess = std::max(rep.sup_hess, norm_rho);
        if (norm_rho > grad_threshold) {
            ++rep.points_above;
            Mat A = p.omega0 + Hq;
            if (!is_positive_definite(hermitian_part(A))) continue;
            OperatorContext cq = ctx;
            Mat G = F_gradient(A, cq, p.f.v[q]);
            cd contr(0);
            for (int i = 0; i < p.n; ++i)
                for (int j = 0; j < p.n; ++j) contr += G(i, j) * Hq(i, j);
            double trace_g = G.real().trace();
            rep.min_margin = std::min(rep.min_margin, contr.real() - mu * (1.0 - trace_g));
        }
    }
    if (rep.points_above == 0) rep.min_margin = 0.0;
    (void)threads;
    return rep;
}

H2DerivativeReport h2_derivative_report(const TorusProblem& p, Spectral& sp) {
    H2DerivativeReport rep;
    auto grads = sp.z_gradient(p.f);
    for (const auto& gi : grads)
        for (const cd& v : gi) rep.sup_grad_f = std::max(rep.sup_grad_f, 2.0 * std::abs(v));
    HermField Hf = sp.complex_hessian(p.f);
    const size_t P = p.grid().points();
    for (size_t q = 0; q < P; ++q) rep.sup_hess_f = std::max(rep.sup_hess_f, Hf.at(q).norm());
    rep.c_h2 = std::max(rep.sup_grad_f, rep.sup_hess_f) / (1.0 + p.f.sup());
    return rep;
}

} // namespace formeq
