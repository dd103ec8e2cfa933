#pragma once

#include <functional>
#include <memory>

#include "formeq/cone.hpp"

namespace formeq {

// Uniform periodic grid on the unit torus: 2n real axes of N points each,
// axes ordered (x_1..x_n, y_1..y_n), row-major with the last axis fastest.
struct GridShape {
    int n = 1;
    int N = 8;
    int axes() const { return 2 * n; }
    size_t points() const {
        size_t p = 1;
        for (int a = 0; a < axes(); ++a) p *= static_cast<size_t>(N);
        return p;
    }
};

struct RealField {
    GridShape g;
    std::vector<double> v;
    RealField() = default;
    explicit RealField(GridShape gs) : g(gs), v(gs.points(), 0.0) {}
    double sup() const {
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double mean() const {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    }
    void shift(double c) {
        for (double& x : v) x += c;
    }
};

// Per-point Hermitian matrices, stored densely: entry(i,j) of point p at
// v[p*n*n + i*n + j].
struct HermField {
    GridShape g;
    int n = 0;
    std::vector<cd> v;
    HermField() = default;
    HermField(GridShape gs, int n_) : g(gs), n(n_), v(gs.points() * n_ * n_, cd(0)) {}
    Mat at(size_t p) const {
        Mat A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = v[p * n * n + i * n + j];
        return A;
    }
    void set(size_t p, const Mat& A) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v[p * n * n + i * n + j] = A(i, j);
    }
};

// FFT workspace with cached plans for one grid shape.
class Spectral {
  public:
    explicit Spectral(GridShape g);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    // Complex Hessian u_{ij} = d^2 u / dz^i dzbar^j, spectrally exact on the grid.
    HermField complex_hessian(const RealField& u);
    // Holomorphic gradient fields du/dz^i, i = 0..n-1.
    std::vector<std::vector<cd>> z_gradient(const RealField& u);
    // Inverse of the constant-coefficient operator sum_ij C(i,j) v_{ij} on
    // mean-zero fields (C Hermitian negative definite).
    RealField solve_frozen(const RealField& rhs, const Mat& C);
    // Remove the mean.
    static void project_mean_zero(RealField& u);

    const GridShape grid;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

// Flat-torus instance of the equation.
struct TorusProblem {
    int n = 1;
    int N = 8;
    Mat rho, omega0;
    FormBundle bundle;   // constant components, degrees 1..n-1; bundle.rho = rho
    RealField f;         // density on the grid
    double kappa = 1.0;

    GridShape grid() const { return GridShape{n, N}; }
    OperatorContext context() const { return OperatorContext(bundle, kappa); }
    void validate() const;
};

// kappa from the class normalization; volumes cancel on the unit torus.
double kappa_from_classes(const TorusProblem& p);

// The unique t >= 0 with F(A0 + tB) = kappa, if any.
std::optional<double> solve_ray(const Mat& A0, const Mat& B, const OperatorContext& ctx);

// kappa - F(A(x)) pointwise; invalid points (non-Kahler) are reported.
struct ResidualField {
    RealField r;
    double min_eig = 0.0;          // min over grid of min eigenvalue of A(x)
    long invalid_points = -1;      // count of non-Kahler points (-1: none)
    size_t worst_point = 0;
};
ResidualField residual(const RealField& u, const TorusProblem& p, Spectral& sp, int threads = 0);

// Back-solve the density so u_star is an exact discrete solution.
TorusProblem manufactured_problem(const RealField& u_star, const FormBundle& bundle,
                                  const Mat& omega0, double kappa, Spectral& sp);

struct StepRecord {
    double t = 0;
    int newton_iters = 0;
    double residual_sup = 0;
    double min_eig = 0;
    double q_min = 0;
    double functional = 0;
};

enum class SolveStatus { Converged, ConeExit, Stalled };

struct SolveTrace {
    std::vector<StepRecord> steps;
    SolveStatus status = SolveStatus::Converged;
    int total_newton = 0;
    double reached_t = 0;          // largest continuity parameter solved
    size_t exit_point = 0;
    double exit_q_min = 0;
    std::string message;
    std::vector<std::string> warnings;  // failed entry gates (run proceeds)
};

struct SolveOptions {
    double tol = 1e-11;            // Newton target on sup|residual|
    double dt0 = 0.1;
    double dt_floor = 1e-4;
    int max_newton = 50;           // per continuity step
    int threads = 0;               // 0: serial reference kernels
    double krylov_tol = 1e-10;
    int krylov_max = 400;
    bool record_functional = true;
};

std::pair<RealField, SolveTrace> continuity_solve(const TorusProblem& p, const SolveOptions& opts = {},
                                                  const RealField* hint = nullptr);

struct MonitorReport {
    double sup_u = 0;
    double sup_hess = 0;           // sup_x |ddbar u|_rho (Frobenius in the rho frame)
    double grad_threshold = 0;     // configured N
    double mu = 0;
    long points_above = 0;
    double min_margin = 0;         // min over flagged points of F^{ij} u_{ij} - mu(1 - sum F^{ii})
};

MonitorReport monitor_estimates(const RealField& u, const TorusProblem& p, Spectral& sp,
                                double grad_threshold, double mu, int threads = 0);

// Smallest C bounding the density derivatives per the H2-type inequality: on
// constant-component data only the top part varies.
struct H2DerivativeReport {
    double sup_grad_f = 0;
    double sup_hess_f = 0;
    double c_h2 = 0;
};
H2DerivativeReport h2_derivative_report(const TorusProblem& p, Spectral& sp);

} // namespace formeq
