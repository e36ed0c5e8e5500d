#include "sct/linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "sct/errors.hpp"

namespace sct {

CovarianceMatrix::CovarianceMatrix(MatrixXd a) : A(std::move(a)) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw DimensionMismatch("covariance matrix must be square, d >= 1");
    if (!A.isApprox(A.transpose(), 1e-12))
        throw NotPositiveDefinite("covariance matrix must be symmetric");
}

MatrixXd cholesky(const CovarianceMatrix& cov) {
    Eigen::LLT<MatrixXd> llt(cov.A);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("Cholesky factorization failed: matrix not positive definite");
    return llt.matrixL();
}

double spectral_radius(const MatrixXd& Q) {
    const auto n = Q.rows();
    VectorXd x = VectorXd::Ones(n);
    double estimate = 0.0;
    constexpr int kMaxIter = 10000;
    for (int it = 0; it < kMaxIter; ++it) {
        VectorXd y = Q * x;
        // Collatz-Wielandt bounds over the support of x.
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x[i] > 0.0) {
                const double ratio = y[i] / x[i];
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
        }
        estimate = 0.5 * (lo + hi);
        if (hi - lo <= 1e-10 * std::max(1.0, hi)) return hi;
        const double norm = y.lpNorm<Eigen::Infinity>();
        if (norm == 0.0) return 0.0;  // nilpotent
        x = y / norm;
    }
    return estimate;
}

bool is_m_matrix(const MatrixXd& R) {
    if (R.rows() != R.cols()) throw DimensionMismatch("is_m_matrix: matrix must be square");
    const MatrixXd Q = MatrixXd::Identity(R.rows(), R.cols()) - R;
    if ((Q.array() < 0.0).any()) return false;
    return spectral_radius(Q) < 1.0 - 1e-10;
}

MMatrix::MMatrix(MatrixXd r) : R(std::move(r)) {
    if (!is_m_matrix(R)) throw std::invalid_argument("reflection matrix is not an M-matrix");
}

}  // namespace sct
