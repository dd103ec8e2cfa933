#include "formeq/functional.hpp"

#include <array>
#include <cmath>

#include "formeq/grid_kernels.hpp"

namespace formeq {

namespace {

// top coefficient of Lambda ^ exp(A)/..., i.e. sum_k [c_k ^ A^{n-k}/(n-k)!]^[n],
// with the density contributing f * det(rho)
double lambda_wedge_exp_top(const FormBundle& b, double t_scale, double f, const Mat& A) {
    const int n = b.n;
    double v = f * b.rho.determinant().real();
    for (const auto& c : b.comps) {
        FormComponent top = (c.k == n) ? c : wedge(c, form_power(A, n - c.k));
        v += t_scale * top.a[0].real();
    }
    return v;
}

// components of exp(omega0) ^ sum_k h^k/(k+1)! collected at top degree after a
// further wedge with either 1 (kappa part) or the bundle
double mixed_top(const FormBundle& b, double t_scale, double f, double kappa, const Mat& omega0,
                 const Mat& h) {
    const int n = b.n;
    // S_k = h^k/(k+1)!, degree k components
    std::vector<FormComponent> S;
    for (int k = 0; k <= n; ++k) {
        FormComponent s = form_power(h, k, 1.0 / (k + 1));
        S.push_back(std::move(s));
    }
    double val = 0;
    // kappa * [exp(omega0) ^ S]^[n]
    for (int k = 0; k <= n; ++k) {
        FormComponent w = (k == n) ? S[k] : wedge(form_power(omega0, n - k), S[k]);
        val -= kappa * w.a[0].real();
    }
    // density part: f rho^n/n! ^ S_0
    val += f * b.rho.determinant().real() * 1.0;
    // reduced components
    for (const auto& c : b.comps) {
        for (int k = 0; k + c.k <= n; ++k) {
            int j = n - c.k - k;  // omega0 power
            FormComponent w = wedge(c, S[k]);
            if (j > 0) w = wedge(w, form_power(omega0, j));
            val += t_scale * w.a[0].real();
        }
    }
    return val;
}

} // namespace

double functional_value_path(const RealField& phi, const TorusProblem& p, Spectral& sp,
                             double t_scale, const std::vector<double>& f_t, int threads) {
    (void)threads;
    HermField H = sp.complex_hessian(phi);
    const size_t P = p.grid().points();
    double acc = 0;
    for (size_t q = 0; q < P; ++q)
        acc += phi.v[q] * mixed_top(p.bundle, t_scale, f_t[q], p.kappa, p.omega0, H.at(q));
    return acc / static_cast<double>(P);
}

double functional_F(const RealField& phi, const TorusProblem& p, Spectral& sp, int threads) {
    return functional_value_path(phi, p, sp, 1.0, p.f.v, threads);
}

double straight_F1(const RealField& phi, const TorusProblem& p, Spectral& sp) {
    // same quadrature with kappa = 0 (the Lambda part alone)
    HermField H = sp.complex_hessian(phi);
    const size_t P = p.grid().points();
    double acc = 0;
    for (size_t q = 0; q < P; ++q)
        acc += phi.v[q] * mixed_top(p.bundle, 1.0, p.f.v[q], 0.0, p.omega0, H.at(q));
    return acc / static_cast<double>(P);
}

double path_integral_F1(const PotentialPath& path, const TorusProblem& p, Spectral& sp) {
    if (path.nodes.size() != path.t.size() || path.nodes.size() < 2)
        throw input_error("path_integral_F1: need matching node/t lists");
    const size_t P = p.grid().points();
    auto integrand = [&](const RealField& phi, const RealField& phidot) {
        HermField H = sp.complex_hessian(phi);
        double acc = 0;
        for (size_t q = 0; q < P; ++q) {
            Mat A = p.omega0 + H.at(q);
            acc += phidot.v[q] * lambda_wedge_exp_top(p.bundle, 1.0, p.f.v[q], A);
        }
        return acc / static_cast<double>(P);
    };
    double total = 0;
    for (size_t j = 0; j + 1 < path.nodes.size(); ++j) {
        double dt = path.t[j + 1] - path.t[j];
        if (!(dt > 0)) throw input_error("path_integral_F1: t not increasing");
        RealField dot(p.grid());
        for (size_t q = 0; q < P; ++q)
            dot.v[q] = (path.nodes[j + 1].v[q] - path.nodes[j].v[q]) / dt;
        total += 0.5 * dt * (integrand(path.nodes[j], dot) + integrand(path.nodes[j + 1], dot));
    }
    return total;
}

double path_independence_check(const PotentialPath& A, const PotentialPath& B,
                               const TorusProblem& p, Spectral& sp) {
    const auto& ea = A.nodes.back();
    const auto& eb = B.nodes.back();
    double diff = 0;
    for (size_t q = 0; q < ea.v.size(); ++q) diff = std::max(diff, std::abs(ea.v[q] - eb.v[q]));
    if (diff > 1e-12) throw input_error("path_independence_check: endpoint mismatch");
    return std::abs(path_integral_F1(A, p, sp) - path_integral_F1(B, p, sp));
}

std::vector<double> segment_convexity(const RealField& phi0, const RealField& phi1,
                                      const TorusProblem& p, Spectral& sp,
                                      const std::vector<double>& samples) {
    const size_t P = p.grid().points();
    RealField psi(p.grid());
    for (size_t q = 0; q < P; ++q) psi.v[q] = phi1.v[q] - phi0.v[q];
    HermField H0 = sp.complex_hessian(phi0);
    HermField Hs = sp.complex_hessian(psi);
    auto grads = sp.z_gradient(psi);
    OperatorContext ctx = p.context();
    const int n = p.n;
    std::vector<double> out;
    for (double t : samples) {
        double acc = 0;
        for (size_t q = 0; q < P; ++q) {
            Mat A = p.omega0 + H0.at(q) + t * Hs.at(q);
            FormComponent margin = form_power(A, n - 1, p.kappa);
            for (const auto& c : ctx.bundle.comps)
                margin -= (c.k == n - 1) ? c : wedge(c, form_power(A, n - 1 - c.k));
            CVec g(n);
            for (int i = 0; i < n; ++i) g(i) = grads[i][q];
            Mat bb = 2.0 * g * g.adjoint();  // i dpsi ^ dbar psi in the (i/2) frame
            acc += wedge(margin, matrix_form(bb)).a[0].real();
        }
        out.push_back(acc / static_cast<double>(P));
    }
    return out;
}

// ------------------------------------------------------- regularized maximum

namespace {

// smooth bump c exp(-1/(1-x^2)) on (-1,1), normalized numerically; the CDF is
// tabulated once on Gauss-Legendre panels
struct BumpKernel {
    static constexpr int PANELS = 2048;
    static constexpr int GLN = 16;
    std::array<double, GLN> gx{}, gw{};  // nodes/weights on [0,1]
    std::vector<double> cum;             // CDF at panel boundaries, unnormalized
    double total = 0;

    static double raw(double x) {
        double s = 1.0 - x * x;
        return s > 0 ? std::exp(-1.0 / s) : 0.0;
    }

    BumpKernel() {
        // 16-point Gauss-Legendre on [-1,1], mapped to [0,1]
        static const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                     0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
        static const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                     0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};
        for (int i = 0; i < 8; ++i) {
            gx[2 * i] = 0.5 * (1.0 - xs[i]);
            gx[2 * i + 1] = 0.5 * (1.0 + xs[i]);
            gw[2 * i] = 0.5 * ws[i];
            gw[2 * i + 1] = 0.5 * ws[i];
        }
        cum.resize(PANELS + 1, 0.0);
        const double h = 2.0 / PANELS;
        for (int p = 0; p < PANELS; ++p) {
            double a = -1.0 + p * h, s = 0;
            for (int i = 0; i < GLN; ++i) s += gw[i] * raw(a + h * gx[i]);
            cum[p + 1] = cum[p] + s * h;
        }
        total = cum[PANELS];
    }

    // normalized CDF: P(h <= x) for density raw/total on (-1,1)
    double cdf(double x) const {
        if (x <= -1.0) return 0.0;
        if (x >= 1.0) return 1.0;
        const double h = 2.0 / PANELS;
        int p = static_cast<int>((x + 1.0) / h);
        if (p >= PANELS) p = PANELS - 1;
        double a = -1.0 + p * h;
        double s = 0, len = x - a;
        for (int i = 0; i < GLN; ++i) s += gw[i] * raw(a + len * gx[i]);
        return (cum[p] + s * len) / total;
    }
};

const BumpKernel& bump() {
    static BumpKernel k;
    return k;
}

} // namespace

double regularized_max(const std::vector<double>& t, const std::vector<double>& eta) {
    const size_t l = t.size();
    if (l == 0 || eta.size() != l) throw input_error("regularized_max: length mismatch");
    for (double e : eta)
        if (!(e > 0)) throw input_error("regularized_max: eta must be positive");
    // E[max_j(t_j + h_j)] = m + int_m^M (1 - prod_j CDF((s - t_j)/eta_j)) ds
    double m = -std::numeric_limits<double>::infinity();
    double M = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < l; ++j) {
        m = std::max(m, t[j] - eta[j]);
        M = std::max(M, t[j] + eta[j]);
    }
    std::vector<double> brk{m, M};
    for (size_t j = 0; j < l; ++j) {
        for (double b : {t[j] - eta[j], t[j] + eta[j]})
            if (b > m && b < M) brk.push_back(b);
    }
    std::sort(brk.begin(), brk.end());
    const auto& K = bump();
    auto integrand = [&](double s) {
        double prod = 1.0;
        for (size_t j = 0; j < l; ++j) prod *= K.cdf((s - t[j]) / eta[j]);
        return 1.0 - prod;
    };
    double acc = 0;
    static const double xs[12] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                                  -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
                                  0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
                                  0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    static const double ws[12] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
                                  0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
                                  0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                  0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        double a = brk[i], b = brk[i + 1];
        if (!(b > a)) continue;
        const int SUB = 12;
        double hh = (b - a) / SUB;
        for (int s = 0; s < SUB; ++s) {
            double c = a + s * hh, mid = c + 0.5 * hh, half = 0.5 * hh;
            for (int g = 0; g < 12; ++g) acc += ws[g] * half * integrand(mid + half * xs[g]);
        }
    }
    return m + acc;
}

GlueResult glue_subsolutions(const std::vector<GlueInput>& inputs, const TorusProblem& p,
                             Spectral& sp, int threads) {
    GlueResult res;
    const size_t P = p.grid().points();
    const int axes = p.grid().axes();
    const int N = p.N;
    if (inputs.empty()) throw input_error("glue_subsolutions: no inputs");
    for (const auto& in : inputs)
        if (in.u.v.size() != P || in.mask.size() != P)
            throw input_error("glue_subsolutions: field/mask size mismatch");
    // coverage
    for (size_t q = 0; q < P; ++q) {
        bool covered = false;
        for (const auto& in : inputs) covered = covered || in.mask[q];
        if (!covered) throw input_error("glue_subsolutions: grid point not covered by any mask");
    }
    // boundary domination per patch
    std::vector<size_t> strides(axes);
    {
        size_t s = 1;
        for (int a = axes - 1; a >= 0; --a) {
            strides[a] = s;
            s *= N;
        }
    }
    auto neighbor = [&](size_t q, int axis, int dir) {
        size_t coord = (q / strides[axis]) % N;
        size_t moved = (coord + N + dir) % N;
        return q + (moved - coord) * strides[axis];
    };
    for (size_t i = 0; i < inputs.size(); ++i) {
        const auto& in = inputs[i];
        for (size_t q = 0; q < P; ++q) {
            if (!in.mask[q]) continue;
            bool bdry = false;
            for (int a = 0; a < axes && !bdry; ++a)
                for (int d : {-1, 1})
                    if (!inputs[i].mask[neighbor(q, a, d)]) bdry = true;
            if (!bdry) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < inputs.size(); ++j) {
                if (j == i || !inputs[j].mask[q]) continue;
                best = std::max(best, inputs[j].u.v[q] - inputs[j].eta);
            }
            if (!(in.u.v[q] + in.eta <= best)) res.violations.push_back(q);
        }
    }
    if (!res.violations.empty()) {
        res.ok = false;
        return res;
    }
    // pointwise regularized maximum of the active potentials
    res.glued = RealField(p.grid());
    std::vector<double> vals, etas;
    for (size_t q = 0; q < P; ++q) {
        vals.clear();
        etas.clear();
        for (const auto& in : inputs) {
            if (!in.mask[q]) continue;
            vals.push_back(in.u.v[q]);
            etas.push_back(in.eta);
        }
        res.glued.v[q] = regularized_max(vals, etas);
    }
    // cone audit of the glued metric
    HermField H = sp.complex_hessian(res.glued);
    OperatorContext ctx = p.context();
    std::vector<double> qmin;
    if (threads > 1)
        cone_kernel_omp(H, p.omega0, ctx, 1.0, qmin, threads);
    else
        cone_kernel_serial(H, p.omega0, ctx, 1.0, qmin);
    res.q_min = *std::min_element(qmin.begin(), qmin.end());
    res.ok = res.q_min > 0;
    return res;
}

} // namespace formeq
