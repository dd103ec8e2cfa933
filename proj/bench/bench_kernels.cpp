// Timing comparison of the serial reference kernels against the OpenMP
// variants on representative grids. The two paths run identical per-point
// code, so this also re-checks bitwise agreement on every size.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

#include "formeq/grid_kernels.hpp"

using namespace formeq;

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Case {
    TorusProblem p;
    HermField H;
    std::vector<double> f_t;
};

Case make_case(int n, int N, std::uint64_t seed) {
    Case c;
    c.p.n = n;
    c.p.N = N;
    c.p.rho = Mat::Identity(n, n);
    c.p.omega0 = Mat::Identity(n, n);
    c.p.bundle.n = n;
    c.p.bundle.rho = c.p.rho;
    c.p.bundle.add(form_power(c.p.rho, 1));
    if (n >= 3) c.p.bundle.add(form_power(c.p.rho, 2, 0.5));
    c.p.f = RealField(c.p.grid());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    for (auto& v : c.p.f.v) v = unif(rng);
    c.p.kappa = kappa_from_classes(c.p);

    Spectral sp(c.p.grid());
    RealField u(c.p.grid());
    std::vector<size_t> strides(c.p.grid().axes());
    size_t st = 1;
    for (int a = c.p.grid().axes() - 1; a >= 0; --a) {
        strides[a] = st;
        st *= N;
    }
    for (size_t q = 0; q < u.v.size(); ++q) {
        double x = double((q / strides[0]) % N) / N;
        double y = double((q / strides[1]) % N) / N;
        u.v[q] = 0.01 * std::cos(2 * M_PI * x) + 0.006 * std::cos(2 * M_PI * (x + y));
    }
    c.H = sp.complex_hessian(u);
    c.f_t = c.p.f.v;
    return c;
}

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = now();
        fn();
        best = std::min(best, now() - t0);
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int threads = (argc > 1) ? std::atoi(argv[1]) : omp_get_max_threads();
    std::printf("grid kernels: serial reference vs OpenMP (%d threads)\n", threads);
    std::printf("%-10s %-10s %12s %12s %9s  %s\n", "kernel", "grid", "serial[ms]", "omp[ms]",
                "speedup", "bitwise");

    struct Shape {
        int n, N;
    };
    for (Shape s : {Shape{2, 16}, Shape{2, 24}, Shape{3, 8}}) {
        Case c = make_case(s.n, s.N, 42);
        OperatorContext ctx = c.p.context();
        char grid[32];
        std::snprintf(grid, sizeof grid, "n=%d N=%d", s.n, s.N);

        {
            std::vector<double> r1, r2, m1, m2;
            std::vector<unsigned char> f1, f2;
            double ts = time_best_of(3, [&] {
                residual_kernel_serial(c.H, c.p.omega0, ctx, 0.8, c.f_t, r1, m1, f1);
            });
            double tp = time_best_of(3, [&] {
                residual_kernel_omp(c.H, c.p.omega0, ctx, 0.8, c.f_t, r2, m2, f2, threads);
            });
            bool same = std::memcmp(r1.data(), r2.data(), r1.size() * sizeof(double)) == 0;
            std::printf("%-10s %-10s %12.2f %12.2f %8.2fx  %s\n", "residual", grid, 1e3 * ts,
                        1e3 * tp, ts / tp, same ? "yes" : "NO");
        }
        {
            HermField G1(c.p.grid(), s.n), G2(c.p.grid(), s.n);
            double ts = time_best_of(3, [&] {
                gradient_kernel_serial(c.H, c.p.omega0, ctx, 0.8, c.f_t, G1);
            });
            double tp = time_best_of(3, [&] {
                gradient_kernel_omp(c.H, c.p.omega0, ctx, 0.8, c.f_t, G2, threads);
            });
            bool same = std::memcmp(G1.v.data(), G2.v.data(), G1.v.size() * sizeof(cd)) == 0;
            std::printf("%-10s %-10s %12.2f %12.2f %8.2fx  %s\n", "gradient", grid, 1e3 * ts,
                        1e3 * tp, ts / tp, same ? "yes" : "NO");
        }
        {
            std::vector<double> q1, q2;
            double ts = time_best_of(3, [&] {
                cone_kernel_serial(c.H, c.p.omega0, ctx, 0.8, q1);
            });
            double tp = time_best_of(3, [&] {
                cone_kernel_omp(c.H, c.p.omega0, ctx, 0.8, q2, threads);
            });
            bool same = std::memcmp(q1.data(), q2.data(), q1.size() * sizeof(double)) == 0;
            std::printf("%-10s %-10s %12.2f %12.2f %8.2fx  %s\n", "cone", grid, 1e3 * ts, 1e3 * tp,
                        ts / tp, same ? "yes" : "NO");
        }
        {
            HermField G(c.p.grid(), s.n);
            gradient_kernel_serial(c.H, c.p.omega0, ctx, 0.8, c.f_t, G);
            std::vector<double> o1, o2;
            double ts = time_best_of(5, [&] { contract_kernel_serial(G, c.H, o1); });
            double tp = time_best_of(5, [&] { contract_kernel_omp(G, c.H, o2, threads); });
            bool same = std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) == 0;
            std::printf("%-10s %-10s %12.2f %12.2f %8.2fx  %s\n", "contract", grid, 1e3 * ts,
                        1e3 * tp, ts / tp, same ? "yes" : "NO");
        }
    }
    return 0;
}
