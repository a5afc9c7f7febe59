#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mopul/linalg.hpp"
#include "mopul/rng.hpp"

using namespace mopul;

namespace {

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    return rng.normal_matrix(rows, cols, 0.0, 1.0);
}

}  // namespace

TEST_CASE("svd reconstructs and orders singular values") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const Index rows = 1 + static_cast<Index>(rng.next_u64() % 6);
        const Index cols = 1 + static_cast<Index>(rng.next_u64() % 6);
        const Matrix m = random_matrix(rng, rows, cols);
        const SvdResult r = svd(m);
        CHECK((r.reconstruct() - m).norm() <= 1e-12 * std::max(1.0, m.norm()));
        for (Index i = 0; i + 1 < r.singular_values.size(); ++i) {
            CHECK(r.singular_values(i) >= r.singular_values(i + 1));
        }
        CHECK((r.U.transpose() * r.U - Matrix::Identity(r.U.cols(), r.U.cols())).norm() <= 1e-12);
        CHECK((r.V.transpose() * r.V - Matrix::Identity(r.V.cols(), r.V.cols())).norm() <= 1e-12);
    }
}

TEST_CASE("pinv satisfies the Penrose conditions") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Index rows = 1 + static_cast<Index>(rng.next_u64() % 5);
        const Index cols = 1 + static_cast<Index>(rng.next_u64() % 5);
        Matrix m = random_matrix(rng, rows, cols);
        if (trial % 3 == 0 && rows > 1 && cols > 1) {
            m.col(cols - 1) = m.col(0);  // force rank deficiency
        }
        const Matrix p = pinv(m);
        const double scale = std::max(1.0, m.norm());
        CHECK((m * p * m - m).norm() <= 1e-9 * scale);
        CHECK((p * m * p - p).norm() <= 1e-9 * std::max(1.0, p.norm()));
        CHECK((m * p - (m * p).transpose()).norm() <= 1e-9 * scale);
        CHECK((p * m - (p * m).transpose()).norm() <= 1e-9 * scale);
    }
}

TEST_CASE("matrix norms against independent formulas") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix m = random_matrix(rng, 4, 3);
        const SvdResult r = svd(m);
        CHECK(spectral_norm(m) == doctest::Approx(r.singular_values(0)).epsilon(1e-12));
        CHECK(nuclear_norm(m) == doctest::Approx(r.singular_values.sum()).epsilon(1e-12));
        // Frobenius norm is computed directly; the singular values give an
        // independent route to the same value.
        CHECK(frobenius_norm(m) ==
              doctest::Approx(std::sqrt(r.singular_values.squaredNorm())).epsilon(1e-12));
    }
}

TEST_CASE("q_norm and cholesky on an SPD matrix") {
    Matrix q(2, 2);
    q << 4.0, 1.0, 1.0, 3.0;
    Vector x(2);
    x << 1.0, -2.0;
    // x'Qx = 4 - 4 + 12 = 12 directly.
    CHECK(q_norm(x, q) == doctest::Approx(std::sqrt(12.0)).epsilon(1e-14));
    const Matrix l = cholesky(q);
    CHECK((l * l.transpose() - q).norm() <= 1e-14);
    CHECK(l(0, 1) == 0.0);

    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(q_norm(x, bad), std::invalid_argument);
    CHECK_THROWS_AS(cholesky(bad), std::invalid_argument);
}

TEST_CASE("sym_eigs matches hand-computed spectrum") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;  // eigenvalues 1 and 3
    const Vector e = sym_eigs(m);
    CHECK(e(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e(1) == doctest::Approx(3.0).epsilon(1e-12));

    Matrix asym(2, 2);
    asym << 0.0, 1.0, -1.0, 0.0;
    CHECK_THROWS_AS(sym_eigs(asym), std::invalid_argument);
}

TEST_CASE("matrix_rank detects constructed rank") {
    Rng rng(3);
    const Matrix u = random_matrix(rng, 5, 2);
    const Matrix v = random_matrix(rng, 4, 2);
    CHECK(matrix_rank(u * v.transpose()) == 2);
    CHECK(matrix_rank(Matrix::Zero(3, 3)) == 0);
    CHECK(matrix_rank(Matrix::Identity(4, 4)) == 4);
}

TEST_CASE("require_finite rejects NaN and infinity") {
    Matrix m = Matrix::Zero(2, 2);
    CHECK_NOTHROW(require_finite(m, "m"));
    m(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(require_finite(m, "m"), std::invalid_argument);
    Vector v = Vector::Zero(2);
    v(0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_finite(v, "v"), std::invalid_argument);
}
