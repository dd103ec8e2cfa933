#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "formeq/subsets.hpp"

namespace formeq {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct singular_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct model_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool is_hermitian(const Mat& A, double tol = 1e-12) {
    return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, A.cwiseAbs().maxCoeff());
}

inline Mat hermitian_part(const Mat& A) { return 0.5 * (A + A.adjoint()); }

inline std::vector<double> herm_eigenvalues(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    return out;
}

inline double min_eigenvalue(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double frobenius(const Mat& A) { return A.norm(); }

// Eigenvalue classification with the declared tolerances: PD needs
// min eig > n*eps_mach*|A|, PSD allows min eig >= -1e-12*|A|.
inline bool is_positive_definite(const Mat& A) {
    double scale = std::max(frobenius(A), 1e-300);
    return min_eigenvalue(A) > A.rows() * std::numeric_limits<double>::epsilon() * scale;
}

inline bool is_positive_semidefinite(const Mat& A) {
    double scale = std::max(frobenius(A), 1e-300);
    return min_eigenvalue(A) >= -1e-12 * scale;
}

// Determinant of the submatrix with rows I, columns J; minor(A, {}, {}) = 1.
inline cd minor_det(const Mat& A, const IndexSet& I, const IndexSet& J) {
    if (I.size() != J.size()) throw input_error("minor: |I| != |J|");
    const int k = static_cast<int>(I.size());
    if (k == 0) return cd(1.0, 0.0);
    for (int v : I)
        if (v < 0 || v >= A.rows()) throw input_error("minor: row index out of range");
    for (int v : J)
        if (v < 0 || v >= A.cols()) throw input_error("minor: column index out of range");
    if (k == 1) return A(I[0], J[0]);
    if (k == 2) return A(I[0], J[0]) * A(I[1], J[1]) - A(I[0], J[1]) * A(I[1], J[0]);
    Mat S(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) S(r, c) = A(I[r], J[c]);
    return S.determinant();
}

// k-th elementary symmetric function of a list of reals.
inline double elementary_symmetric(const std::vector<double>& lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (k < 0 || k > n) return 0.0;
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += lam[i] * e[j - 1];
    return e[k];
}

// sigma_k(A): k-th elementary symmetric function of the eigenvalues.
inline double sigma(const Mat& A, int k) {
    const int n = static_cast<int>(A.rows());
    if (k < 0 || k > n) throw input_error("sigma: k out of range");
    if (k == 0) return 1.0;
    return elementary_symmetric(herm_eigenvalues(A), k);
}

// Linearized operator T_{k-1}(A) with <T_{k-1}(A), B> = d/dt sigma_k(A + tB)|_0.
// For diagonal A this is diag(sigma_{k-1} of A with row/column i deleted).
inline Mat sigma_linearized(const Mat& A, int k) {
    const int n = static_cast<int>(A.rows());
    if (k < 1 || k > n) throw input_error("sigma_linearized: k out of range");
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + n);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> rest;
        rest.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) rest.push_back(lam[j]);
        d(i) = elementary_symmetric(rest, k - 1);
    }
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// Orthonormal basis (columns) of the kernel of a PSD Hermitian V, using the
// relative eigenvalue cutoff 1e-10*|V|.
inline Mat kernel_basis(const Mat& V, double rel_cut = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Mat> es(V);
    const int n = static_cast<int>(V.rows());
    double scale = std::max(frobenius(V), 1e-300);
    if (es.eigenvalues()(0) < -1e-10 * scale) throw input_error("kernel_basis: V not PSD");
    int m = 0;
    while (m < n && es.eigenvalues()(m) <= rel_cut * scale) ++m;
    return es.eigenvectors().leftCols(m);
}

// Moore-Penrose inverse of A compressed to the column space of K (orthonormal
// columns): K (K^* A K)^{-1} K^*.
inline Mat compressed_inverse(const Mat& A, const Mat& K) {
    const int m = static_cast<int>(K.cols());
    if (m == 0) return Mat::Zero(A.rows(), A.cols());
    Mat core = K.adjoint() * A * K;
    return K * core.inverse() * K.adjoint();
}

// lim_{t->inf} (A + tV)^{-1} for A positive definite and V PSD: the
// Moore-Penrose inverse of A restricted to the orthogonal complement of
// range(V). Full-rank V gives the zero matrix.
inline Mat mp_ray_limit(const Mat& A, const Mat& V) {
    if (A.rows() != V.rows()) throw input_error("mp_ray_limit: dimension mismatch");
    if (!is_positive_definite(hermitian_part(A))) throw input_error("mp_ray_limit: A not PD");
    if (frobenius(V) == 0.0) throw input_error("mp_ray_limit: V = 0");
    Mat K = kernel_basis(hermitian_part(V));
    return compressed_inverse(A, K);
}

struct SchurSplit {
    // Indices of the retained head block H and the eliminated tail block V,
    // in the (head, tail) ordering used for the inverse blocks below.
    IndexSet head, tail;
    Mat H, V, D;          // A = [[H, D], [D^*, V]] after permutation
    Mat Hhat, Vhat;       // H - D V^{-1} D^*,  V - D^* H^{-1} D
    Mat inv_tl, inv_tr, inv_bl, inv_br;  // blocks of A^{-1} in the same ordering
};

// Block split of A with the Schur complements and the assembled block form of
// A^{-1}; the lower-right block of A^{-1} equals Vhat^{-1}.
inline SchurSplit schur_split(const Mat& A, const IndexSet& tail) {
    const int n = static_cast<int>(A.rows());
    SchurSplit out;
    out.tail = tail;
    out.head = subset_complement(tail, n);
    const int h = static_cast<int>(out.head.size());
    const int v = static_cast<int>(out.tail.size());
    if (v == 0 || h == 0) throw input_error("schur_split: empty block");
    out.H.resize(h, h);
    out.V.resize(v, v);
    out.D.resize(h, v);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < h; ++c) out.H(r, c) = A(out.head[r], out.head[c]);
        for (int c = 0; c < v; ++c) out.D(r, c) = A(out.head[r], out.tail[c]);
    }
    for (int r = 0; r < v; ++r)
        for (int c = 0; c < v; ++c) out.V(r, c) = A(out.tail[r], out.tail[c]);

    Eigen::FullPivLU<Mat> luV(out.V);
    if (!luV.isInvertible())
        throw singular_error("schur_split: singular V block, rcond ~ " +
                             std::to_string(luV.rcond()));
    Eigen::FullPivLU<Mat> luA(A);
    if (!luA.isInvertible())
        throw singular_error("schur_split: singular A, rcond ~ " + std::to_string(luA.rcond()));

    Mat Vinv = luV.inverse();
    out.Hhat = out.H - out.D * Vinv * out.D.adjoint();
    Eigen::FullPivLU<Mat> luH(out.H);
    if (luH.isInvertible())
        out.Vhat = out.V - out.D.adjoint() * luH.inverse() * out.D;
    else
        out.Vhat = Mat();  // V-side complement undefined when H singular

    Mat Hhat_inv = out.Hhat.inverse();
    out.inv_tl = Hhat_inv;
    out.inv_tr = -Hhat_inv * out.D * Vinv;
    out.inv_bl = out.inv_tr.adjoint();
    out.inv_br = Vinv + Vinv * out.D.adjoint() * Hhat_inv * out.D * Vinv;
    return out;
}

} // namespace formeq
