#pragma once

// Dense small-matrix kernels: matrix exponential, continuous Lyapunov solver,
// observability Gramian, output-response bound, and minimal scaling factors
// between quadratic forms. Everything here is sized for desk-scale problems
// (n <= ~8); no sparse or Schur-based paths.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qswitch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Largest singular value (Euclidean induced norm).
inline double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

inline bool is_finite(const Matrix& m) { return m.allFinite(); }

// Max real part over the spectrum.
inline double max_real_eigenvalue(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const Matrix& a, double tol = 1e-9) {
    return max_real_eigenvalue(a) < -tol;
}

// Symmetric eigenvalues, ascending.
inline Vector sym_eigenvalues(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline bool is_symmetric(const Matrix& s, double rel_tol = 1e-12) {
    return (s - s.transpose()).cwiseAbs().maxCoeff() <=
           rel_tol * std::max(1.0, s.cwiseAbs().maxCoeff());
}

inline bool is_positive_definite(const Matrix& s) {
    if (s.rows() != s.cols() || !is_symmetric(s)) return false;
    return sym_eigenvalues(s)(0) > 0.0;
}

// e^{A t} by scaling-and-squaring with a [13/13] Pade approximant.
inline Matrix matrix_exponential(const Matrix& a, double t = 1.0) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exponential: square matrix required");
    if (!is_finite(a) || !std::isfinite(t)) throw std::invalid_argument("matrix_exponential: non-finite input");
    const Eigen::Index k = a.rows();
    Matrix at = a * t;

    const double theta13 = 5.371920351148152;  // 1-norm bound for the order-13 approximant
    double nrm = at.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        at /= std::pow(2.0, squarings);
    }

    static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                               1187353796428800.,  129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,       1323241920.,
                               40840800.,          960960.,            16380., 182., 1.};
    const Matrix ident = Matrix::Identity(k, k);
    const Matrix a2 = at * at;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;
    Matrix u = at * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                     b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
    Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
               b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    Matrix e = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) e = e * e;
    return e;
}

// Unique SPD solution P of F^T P + P F = -Q for Hurwitz F, by Kronecker
// vectorization and a dense LU solve (k^2 x k^2; cheap at this scale).
inline Matrix solve_lyapunov(const Matrix& f, const Matrix& q) {
    const Eigen::Index k = f.rows();
    if (f.cols() != k || q.rows() != k || q.cols() != k)
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    if (!is_symmetric(q) || sym_eigenvalues(q)(0) <= 0.0)
        throw std::invalid_argument("solve_lyapunov: Q must be symmetric positive definite");
    if (!is_hurwitz(f))
        throw std::invalid_argument("solve_lyapunov: F is not Hurwitz");

    // vec(F^T P + P F) = (I (x) F^T + F^T (x) I) vec(P)
    const Eigen::Index kk = k * k;
    Matrix sys = Matrix::Zero(kk, kk);
    const Matrix ft = f.transpose();
    for (Eigen::Index i = 0; i < k; ++i)
        sys.block(i * k, i * k, k, k) += ft;               // I (x) F^T
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            sys.block(i * k, j * k, k, k) += ft(i, j) * Matrix::Identity(k, k);  // F^T (x) I

    Vector rhs = Eigen::Map<const Vector>(q.data(), kk);
    Vector vp = sys.partialPivLu().solve(-rhs);
    Matrix p = Eigen::Map<Matrix>(vp.data(), k, k);
    p = 0.5 * (p + p.transpose());
    if (sym_eigenvalues(p)(0) <= 0.0)
        throw std::runtime_error("solve_lyapunov: solution not positive definite");
    return p;
}

// W(tau) = int_0^tau e^{A^T s} C^T C e^{A s} ds via the Van Loan augmented
// exponential: exp([[-A^T, C^T C], [0, A]] tau) has e^{A tau} and
// e^{-A^T tau} W(tau) in its blocks.
inline Matrix observability_gramian(const Matrix& a, const Matrix& c, double tau) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || c.cols() != n) throw std::invalid_argument("observability_gramian: dimension mismatch");
    if (!(tau > 0.0)) throw std::invalid_argument("observability_gramian: tau must be positive");
    Matrix blk = Matrix::Zero(2 * n, 2 * n);
    blk.topLeftCorner(n, n) = -a.transpose();
    blk.topRightCorner(n, n) = c.transpose() * c;
    blk.bottomRightCorner(n, n) = a;
    Matrix e = matrix_exponential(blk, tau);
    // bottom-right block is e^{A tau}; W = (e^{A tau})^T * top-right block
    Matrix w = e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
    w = 0.5 * (w + w.transpose());
    Vector ev = sym_eigenvalues(w);
    if (ev(0) < 1e-12 * ev(n - 1))
        throw std::runtime_error("observability_gramian: numerically singular (observability degeneracy)");
    return w;
}

// Guarded overestimate of max_{0<=s<=tau} ||C e^{A s}||: 1001-point grid with
// a Lipschitz safety factor, never below ||C||.
inline double output_response_bound(const Matrix& a, const Matrix& c, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("output_response_bound: tau must be positive");
    constexpr int kPoints = 1001;
    const double dt = tau / (kPoints - 1);
    const Matrix step = matrix_exponential(a, dt);
    Matrix eat = Matrix::Identity(a.rows(), a.cols());
    double peak = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        peak = std::max(peak, spectral_norm(c * eat));
        if (i + 1 < kPoints) eat = eat * step;
    }
    const double gamma_loc = spectral_norm(a);
    return std::max(peak * (1.0 + tau * gamma_loc / (kPoints - 1)), spectral_norm(c));
}

// Smallest c with z^T J^T P2 J z <= c z^T P1 z for all z: the top generalized
// eigenvalue of the pencil (J^T P2 J, P1), via Cholesky congruence of P1.
inline double min_scaling_factor(const Matrix& p1, const Matrix& p2, const Matrix& j) {
    if (!is_positive_definite(p1) || !is_positive_definite(p2))
        throw std::invalid_argument("min_scaling_factor: P1, P2 must be SPD");
    Eigen::LLT<Matrix> llt(p1);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("min_scaling_factor: Cholesky of P1 failed");
    const Matrix m = j.transpose() * p2 * j;
    // S = G^-1 M G^-T with P1 = G G^T
    Matrix s = llt.matrixL().solve(m);
    s = llt.matrixL().solve(s.transpose()).transpose();
    s = 0.5 * (s + s.transpose());
    const double cmax = sym_eigenvalues(s).maxCoeff();
    return std::max(cmax, 0.0);
}

}  // namespace qswitch
