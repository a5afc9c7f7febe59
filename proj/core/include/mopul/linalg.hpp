#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mopul {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin SVD M = U * diag(s) * V^T with singular values in non-increasing order.
struct SvdResult {
    Matrix U;
    Vector singular_values;
    Matrix V;

    Matrix reconstruct() const { return U * singular_values.asDiagonal() * V.transpose(); }
};

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& name);
void require_finite(const Vector& v, const std::string& name);

SvdResult svd(const Matrix& m);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// 1e-12 * s_max are treated as zero.
Matrix pinv(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Sum of singular values.
double nuclear_norm(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// sqrt(x^T Q x) for symmetric positive definite Q.
/// Throws std::invalid_argument("Q not positive definite") on Cholesky failure.
double q_norm(const Vector& x, const Matrix& q);

/// Lower-triangular Cholesky factor L with Q = L L^T.
/// Throws std::invalid_argument("Q not positive definite") on failure.
Matrix cholesky(const Matrix& q);

/// Eigenvalues of a symmetric matrix, ascending.
/// Throws std::invalid_argument("not symmetric") if the input is
/// asymmetric beyond 1e-12 relative.
Vector sym_eigs(const Matrix& m);

/// Numerical rank with the same cutoff as pinv.
Index matrix_rank(const Matrix& m);

}  // namespace mopul
