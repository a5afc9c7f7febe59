#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mopul/rng.hpp"
#include "mopul/system.hpp"

using namespace mopul;

namespace {

SystemSpec random_spec(Rng& rng, Index n, Index m, Index p, Index horizon) {
    const Matrix b = rng.normal_matrix(n, m, 0.0, 1.0);
    const Matrix c = rng.normal_matrix(p, n, 0.0, 1.0);  // p >= n: full column rank a.s.
    const Vector x0 = rng.uniform_vector(n, -1.0, 1.0);
    std::vector<Vector> refs;
    for (Index t = 0; t < horizon; ++t) refs.push_back(rng.uniform_vector(p, -1.0, 1.0));
    return SystemSpec(b, c, x0, refs);
}

}  // namespace

TEST_CASE("rollout_exact reproduces a hand-computed trajectory") {
    Matrix a(2, 2), b(2, 1), c(2, 2);
    a << 0.5, 0.0, 0.0, 2.0;
    b << 1.0, 1.0;
    c = Matrix::Identity(2, 2);
    Vector x0(2);
    x0 << 1.0, -1.0;
    Vector u0(1), u1(1);
    u0 << 1.0;
    u1 << 0.0;
    SystemSpec spec(b, c, x0, {Vector::Zero(2), Vector::Zero(2)});
    const Trajectory traj = rollout_exact(spec, a, {u0, u1});
    REQUIRE(traj.states.size() == 3);
    // x1 = A x0 + B u0 = (0.5 + 1, -2 + 1) = (1.5, -1)
    CHECK(traj.states[1](0) == doctest::Approx(1.5));
    CHECK(traj.states[1](1) == doctest::Approx(-1.0));
    // x2 = A x1 = (0.75, -2)
    CHECK(traj.states[2](0) == doctest::Approx(0.75));
    CHECK(traj.states[2](1) == doctest::Approx(-2.0));
    CHECK(traj.outputs[2] == traj.states[2]);  // C = I
}

TEST_CASE("decoupled rollout substitutes references for the previous state") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        SystemSpec spec = random_spec(rng, 3, 2, 4, 4);
        const Matrix a = rng.normal_matrix(3, 3, 0.0, 0.5);
        std::vector<Vector> u;
        for (int t = 0; t < 4; ++t) u.push_back(rng.uniform_vector(2, -1.0, 1.0));
        const Matrix cp = pinv(spec.c);
        const Trajectory traj = rollout_approx(spec, a, u);
        for (Index t = 1; t <= 4; ++t) {
            const Vector expect = a * cp * spec.reference_or_r0(t - 1) + spec.b * u[t - 1];
            CHECK((traj.states[t] - expect).norm() <= 1e-12);
            CHECK((traj.outputs[t] - spec.c * traj.states[t]).norm() <= 1e-12);
        }
        // Caller-supplied pseudoinverse takes the same path.
        const Trajectory traj2 = rollout_approx(spec, a, u, cp);
        for (Index t = 0; t <= 4; ++t) CHECK(traj.states[t] == traj2.states[t]);
    }
}

TEST_CASE("cumulative_error sums per-stage norms") {
    Rng rng(31);
    SystemSpec spec = random_spec(rng, 2, 2, 3, 3);
    const Matrix a = rng.normal_matrix(2, 2, 0.0, 0.5);
    std::vector<Vector> u;
    for (int t = 0; t < 3; ++t) u.push_back(rng.uniform_vector(2, -1.0, 1.0));
    const Trajectory traj = rollout_exact(spec, a, u);
    double expect = 0.0;
    for (Index t = 1; t <= 3; ++t) expect += (traj.outputs[t] - spec.reference(t)).norm();
    CHECK(cumulative_error(traj, spec) == doctest::Approx(expect).epsilon(1e-14));

    Matrix q(3, 3);
    q << 2, 0, 0, 0, 1, 0, 0, 0, 4;
    const ErrorNorm wq = ErrorNorm::weighted(q);
    double expect_q = 0.0;
    for (Index t = 1; t <= 3; ++t) expect_q += q_norm(traj.outputs[t] - spec.reference(t), q);
    CHECK(cumulative_error(traj, spec, wq) == doctest::Approx(expect_q).epsilon(1e-14));
}

TEST_CASE("poly_error equals the squared rollout error") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.next_u64() % 4);   // 2..5
        const Index m = 1 + static_cast<Index>(rng.next_u64() % n);   // 1..n
        const Index p = n + static_cast<Index>(rng.next_u64() % 2);   // n..n+1
        const Index horizon = 1 + static_cast<Index>(rng.next_u64() % 6);
        SystemSpec spec = random_spec(rng, n, m, p, horizon);
        const Matrix a = rng.normal_matrix(n, n, 0.0, 0.6);
        std::vector<Vector> u;
        for (Index t = 0; t < horizon; ++t) u.push_back(rng.uniform_vector(m, -1.0, 1.0));
        const Index t = 1 + static_cast<Index>(rng.next_u64() % horizon);
        const Trajectory traj = rollout_exact(spec, a, u);
        const double sq = (traj.outputs[t] - spec.reference(t)).squaredNorm();
        const double poly = poly_error(spec, a, u, t);
        CHECK(std::abs(poly - sq) <= 1e-10 * std::max(1.0, sq));
    }
}

TEST_CASE("reference accessors include r0 = C x0") {
    Rng rng(51);
    SystemSpec spec = random_spec(rng, 2, 1, 2, 2);
    CHECK(spec.reference_or_r0(0) == spec.c * spec.x0);
    CHECK(spec.reference_or_r0(1) == spec.reference(1));
    CHECK(spec.reference_or_r0(2) == spec.reference(2));
}
