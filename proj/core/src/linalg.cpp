#include "mopul/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mopul {

namespace {
constexpr double kRankCutoff = 1e-12;
}

void require_finite(const Matrix& m, const std::string& name) {
    if (!m.allFinite()) {
        throw std::invalid_argument(name + " contains non-finite entries");
    }
}

void require_finite(const Vector& v, const std::string& name) {
    if (!v.allFinite()) {
        throw std::invalid_argument(name + " contains non-finite entries");
    }
}

SvdResult svd(const Matrix& m) {
    require_finite(m, "svd input");
    Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) {
        throw std::runtime_error("svd failure on " + std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) + " matrix");
    }
    return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix pinv(const Matrix& m) {
    SvdResult dec = svd(m);
    const double smax = dec.singular_values.size() > 0 ? dec.singular_values(0) : 0.0;
    const double cutoff = kRankCutoff * smax;
    Vector inv = dec.singular_values;
    for (Index i = 0; i < inv.size(); ++i) {
        inv(i) = dec.singular_values(i) > cutoff ? 1.0 / dec.singular_values(i) : 0.0;
    }
    return dec.V * inv.asDiagonal() * dec.U.transpose();
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return svd(m).singular_values(0);
}

double nuclear_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return svd(m).singular_values.sum();
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

Matrix cholesky(const Matrix& q) {
    require_finite(q, "Q");
    if (q.rows() != q.cols()) throw std::invalid_argument("Q not positive definite: not square");
    Eigen::LLT<Matrix> llt(q);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("Q not positive definite");
    }
    return llt.matrixL();
}

double q_norm(const Vector& x, const Matrix& q) {
    if (q.rows() != x.size()) throw std::invalid_argument("q_norm dimension mismatch");
    Matrix l = cholesky(q);
    return (l.transpose() * x).norm();
}

Vector sym_eigs(const Matrix& m) {
    require_finite(m, "sym_eigs input");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed");
    }
    return es.eigenvalues();
}

Index matrix_rank(const Matrix& m) {
    SvdResult dec = svd(m);
    if (dec.singular_values.size() == 0) return 0;
    const double cutoff = kRankCutoff * dec.singular_values(0);
    Index r = 0;
    for (Index i = 0; i < dec.singular_values.size(); ++i) {
        if (dec.singular_values(i) > cutoff) ++r;
    }
    return r;
}

}  // namespace mopul
