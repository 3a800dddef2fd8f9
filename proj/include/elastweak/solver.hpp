// Direct solution of the assembled saddle-point system plus the rank and
// smallest-singular-value utilities used by the verification suites.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "elastweak/assembly.hpp"
#include "elastweak/exactlinalg.hpp"

namespace elastweak {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    Eigen::VectorXd sigma, u, p;
    double rel_residual = 0.0;
    int unknowns = 0;
};

/// Direct sparse solve of the symmetric indefinite block system.  LU with
/// partial pivoting; deterministic for a fixed matrix.
inline SolveReport solve_saddle(const BlockSystem& sys, double tol = 1e-10)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(sys.mat);
    lu.factorize(sys.mat);
    if (lu.info() != Eigen::Success) {
        std::string detail = lu.lastErrorMessage();
        if (sys.size() <= 2000) {
            Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(sys.mat));
            detail += "; smallest singular value " +
                      std::to_string(svd.singularValues()(svd.singularValues().size() - 1));
        }
        throw SolverError("saddle solve: factorization failed (" + detail +
                          "); the space pairing is likely unstable");
    }
    Eigen::VectorXd x = lu.solve(sys.rhs);

    double bn = sys.rhs.norm();
    double rel = bn > 0 ? (sys.mat * x - sys.rhs).norm() / bn : (sys.mat * x).norm();
    if (!(rel <= tol))
        throw SolverError("saddle solve: relative residual " + std::to_string(rel) +
                          " exceeds tolerance; the system is near singular");

    SolveReport rep;
    rep.unknowns = sys.size();
    rep.sigma = x.head(sys.n_sigma);
    rep.u = x.segment(sys.n_sigma, sys.n_u);
    rep.p = x.tail(sys.n_p);
    rep.rel_residual = rel;
    return rep;
}

/// Floating-point rank: number of singular values above tol * sigma_max.
inline int matrix_rank(const Eigen::MatrixXd& m, double tol = 1e-10)
{
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0)) ++rank;
    return rank;
}

/// Exact rank over the rationals (fraction-free elimination).
inline int matrix_rank(const MatQ& m) { return bareiss_rank(m); }

namespace detail {

// lambda_min of the pencil (K, W) with K symmetric positive semidefinite and
// W symmetric positive definite, via Cholesky reduction and inverse power
// iteration (dense eigensolver below the crossover size).
inline double smallest_generalized_eigenvalue(const Eigen::MatrixXd& K, const Eigen::MatrixXd& W)
{
    Eigen::LLT<Eigen::MatrixXd> wllt(W);
    if (wllt.info() != Eigen::Success) throw SolverError("norm matrix is not positive definite");
    Eigen::MatrixXd L = wllt.matrixL();
    // C = L^{-1} K L^{-T}
    Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(K);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
    C = 0.5 * (C + C.transpose());

    const int n = static_cast<int>(C.rows());
    if (n <= 1200) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        return es.eigenvalues()(0);
    }
    Eigen::LLT<Eigen::MatrixXd> cllt(C);
    if (cllt.info() != Eigen::Success) {
        // semidefinite: smallest eigenvalue is (numerically) zero
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        return es.eigenvalues()(0);
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    double lam = 0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd w = cllt.solve(v);
        w.normalize();
        double lam_new = w.dot(C * w);
        if (it > 3 && std::abs(lam_new - lam) < 1e-9 * std::abs(lam_new)) {
            lam = lam_new;
            break;
        }
        lam = lam_new;
        v = w;
    }
    return lam;
}

} // namespace detail

/// Stability constant of the coupling: the smallest generalized singular
/// value of the stacked constraint matrix G = [B; C] with respect to the
/// H(div) inner product on the stress space and L2 on the multiplier pair,
///
///   beta = min_{(v,q)} max_{tau} (div tau, v) + (tau, q)
///                                -------------------------------
///                                ||tau||_div ( ||v||^2 + ||q||^2 )^{1/2}.
inline double infsup_constant(const Eigen::SparseMatrix<double>& G,
                              const Eigen::SparseMatrix<double>& X,
                              const Eigen::SparseMatrix<double>& W)
{
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> xllt(X);
    if (xllt.info() != Eigen::Success)
        throw SolverError("infsup: H(div) Gram matrix is not positive definite");
    Eigen::MatrixXd Gt = Eigen::MatrixXd(G).transpose();
    Eigen::MatrixXd XinvGt = xllt.solve(Gt);
    Eigen::MatrixXd K = G * XinvGt;
    K = 0.5 * (K + K.transpose());
    double lam = detail::smallest_generalized_eigenvalue(K, Eigen::MatrixXd(W));
    return lam > 0 ? std::sqrt(lam) : 0.0;
}

} // namespace elastweak
