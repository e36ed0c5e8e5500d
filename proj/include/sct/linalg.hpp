#pragma once

#include <Eigen/Dense>

namespace sct {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric positive-definite covariance matrix (units: state^2 / time).
struct CovarianceMatrix {
    MatrixXd A;

    explicit CovarianceMatrix(MatrixXd a);
    int dim() const { return static_cast<int>(A.rows()); }
};

/// Lower-triangular Cholesky factor, L * L^T = A.
/// Throws NotPositiveDefinite if the factorization fails.
MatrixXd cholesky(const CovarianceMatrix& cov);

/// Perron root of an entrywise non-negative matrix via power iteration with an
/// all-ones start and Collatz-Wielandt bounds. A zero matrix returns 0.
double spectral_radius(const MatrixXd& Q);

/// True iff R = I - Q with Q >= 0 entrywise and rho(Q) < 1 - 1e-10.
/// Throws DimensionMismatch for non-square input.
bool is_m_matrix(const MatrixXd& R);

/// Reflection matrix R = I - Q; construction validates the M-matrix property.
struct MMatrix {
    MatrixXd R;

    explicit MMatrix(MatrixXd r);
    int dim() const { return static_cast<int>(R.rows()); }
    MatrixXd Q() const { return MatrixXd::Identity(R.rows(), R.cols()) - R; }
};

}  // namespace sct
