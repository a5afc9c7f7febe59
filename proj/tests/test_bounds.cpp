#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mopul/bounds.hpp"
#include "mopul/experiments.hpp"
#include "mopul/solver.hpp"

using namespace mopul;

namespace {

// Solves the box-constrained tracking preset and returns the extracted
// optimizer together with its objective (the minimal decoupled error level).
struct SolvedTracking {
    MopulProblem problem;
    ExtractedSolution ex;
    double objective = 0.0;
};

SolvedTracking solve_tracking(Index n, Index horizon, std::uint64_t seed, double sigma) {
    IdealInstance inst = gen_ideal(n, horizon, seed);
    std::vector<Vector> refs = perturb_refs(inst, NoiseSpec{0.0, sigma}, seed + 1);
    SolvedTracking out;
    out.problem = preset_amopul1_box(with_references(inst.spec, refs));
    const ConicProgram program = build_amopul(out.problem);
    const Solution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    out.ex = extract_solution(program, sol.x);
    out.objective = sol.objective;
    return out;
}

}  // namespace

TEST_CASE("geometric_sum basics") {
    CHECK(geometric_sum(0.0, 4) == 1.0);
    CHECK(geometric_sum(1.0, 4) == 4.0);
    CHECK(geometric_sum(2.0, 4) == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(geometric_sum(0.5, 3) == doctest::Approx(1.75).epsilon(1e-14));
}

TEST_CASE("contraction_factor matches a direct spectral norm") {
    Rng rng(111);
    const Matrix c = rng.normal_matrix(4, 3, 0.0, 1.0);
    const Matrix a = rng.normal_matrix(3, 3, 0.0, 1.0);
    SystemSpec spec(Matrix::Identity(3, 3), c, Vector::Zero(3), {Vector::Zero(4)});
    CHECK(contraction_factor(spec, a) ==
          doctest::Approx(spectral_norm(c * a * pinv(c))).epsilon(1e-12));
    // With C = I the factor is just ||A||_2.
    SystemSpec spec_id(Matrix::Identity(3, 3), Matrix::Identity(3, 3), Vector::Zero(3),
                       {Vector::Zero(3)});
    CHECK(contraction_factor(spec_id, a) == doctest::Approx(spectral_norm(a)).epsilon(1e-12));
}

TEST_CASE("beta_from_box scales with the box and dominates feasible factors") {
    Rng rng(112);
    IdealInstance inst = gen_ideal(4, 3, 9);
    MopulProblem problem = preset_amopul1_box(inst.spec, 0.4, 0.5);
    const auto beta = beta_from_box(problem);
    REQUIRE(beta.has_value());
    // B = C = I, so the bound is n * alpha.
    CHECK(*beta == doctest::Approx(4 * 0.4).epsilon(1e-12));
    // Any matrix inside the box stays below the bound.
    for (int trial = 0; trial < 50; ++trial) {
        Matrix a(4, 4);
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j) a(i, j) = rng.next_uniform(-0.4, 0.4);
        CHECK(contraction_factor(inst.spec, a) <= *beta + 1e-12);
    }
    MopulProblem no_box = problem;
    no_box.constraints.a_box.reset();
    CHECK_FALSE(beta_from_box(no_box).has_value());
}

TEST_CASE("decoupled_output_errors agrees with an independent output iteration") {
    Rng rng(113);
    const Index n = 3, p = 4, horizon = 5;
    const Matrix c = rng.normal_matrix(p, n, 0.0, 1.0);
    const Matrix b = rng.normal_matrix(n, 2, 0.0, 1.0);
    const Vector x0 = rng.uniform_vector(n, -1.0, 1.0);
    std::vector<Vector> refs;
    for (Index t = 0; t < horizon; ++t) refs.push_back(rng.uniform_vector(p, -1.0, 1.0));
    SystemSpec spec(b, c, x0, refs);
    const Matrix a = rng.normal_matrix(n, n, 0.0, 0.5);
    std::vector<Vector> u;
    for (Index t = 0; t < horizon; ++t) u.push_back(rng.uniform_vector(2, -1.0, 1.0));

    const std::vector<double> errs = decoupled_output_errors(spec, a, u);
    REQUIRE(errs.size() == static_cast<size_t>(horizon));
    const Matrix cacp = c * a * pinv(c);
    Vector yhat = c * x0;
    for (Index t = 1; t <= horizon; ++t) {
        yhat = (cacp * yhat + c * b * u[t - 1]).eval();
        CHECK(errs[t - 1] ==
              doctest::Approx((yhat - spec.reference(t)).norm()).epsilon(1e-12));
    }

    std::vector<double> eps(errs);
    CHECK(in_z_epsilon(spec, a, u, eps, 1e-12));
    eps[2] = errs[2] - 1e-3;
    CHECK_FALSE(in_z_epsilon(spec, a, u, eps));
}

TEST_CASE("theorem2_certificate holds on a solved instance") {
    SolvedTracking st = solve_tracking(4, 3, 21, 0.2);
    const auto beta = beta_from_box(st.problem);
    REQUIRE(beta.has_value());
    const BoundCertificate cert = theorem2_certificate(
        st.problem.spec, st.ex.a, st.ex.controls, *beta, st.objective + 1e-6);
    CHECK(cert.tag == "t2");
    CHECK(cert.preconditions_ok);
    CHECK(cert.holds);
    CHECK(cert.bound_value ==
          doctest::Approx(geometric_sum(*beta, 3) * (st.objective + 1e-6)).epsilon(1e-12));
    // The observed value is the exact-rollout cumulative error.
    const Trajectory traj = rollout_exact(st.problem.spec, st.ex.a, st.ex.controls);
    CHECK(cert.observed_value ==
          doctest::Approx(cumulative_error(traj, st.problem.spec)).epsilon(1e-12));
}

TEST_CASE("theorem2 preconditions fail for an out-of-box amplification bound") {
    SolvedTracking st = solve_tracking(3, 3, 22, 0.2);
    const double zeta = contraction_factor(st.problem.spec, st.ex.a);
    const BoundCertificate cert = theorem2_certificate(
        st.problem.spec, st.ex.a, st.ex.controls, zeta * 0.5, st.objective + 1e-6);
    CHECK_FALSE(cert.preconditions_ok);
}

TEST_CASE("theorem3_tighten and remark3_level") {
    CHECK(theorem3_tighten(6.0, 1.0, 3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(theorem3_tighten(15.0, 2.0, 4) == doctest::Approx(1.0).epsilon(1e-14));
    // Identity weight reduces the weighted level to the unweighted one.
    const Matrix q = Matrix::Identity(3, 3);
    CHECK(remark3_level(6.0, 1.0, 3, q) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(remark3_level(5.0, 0.7, 1, 2.0 * Matrix::Identity(2, 2)) ==
          doctest::Approx(5.0).epsilon(1e-12));
    // Anisotropic weight can only shrink the level further.
    Matrix q2 = Matrix::Identity(2, 2);
    q2(0, 0) = 4.0;
    CHECK(remark3_level(6.0, 1.0, 3, q2) <= theorem3_tighten(6.0, 1.0, 3) + 1e-12);
}

TEST_CASE("theorem4_bound spec values") {
    CHECK(theorem4_bound({0.0, 0.0}, 0.5) == 0.0);
    CHECK_THROWS_AS(theorem4_bound({}, 0.3), std::invalid_argument);
    CHECK(theorem4_bound({1.0, 1.0}, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    // (1 + gamma) * (eps_1 + ... + eps_{N-1}) + eps_N
    CHECK(theorem4_bound({2.0, 3.0, 5.0}, 0.5) == doctest::Approx(1.5 * 5.0 + 5.0).epsilon(1e-14));
}

TEST_CASE("theorem 5/6 sandwich certificates") {
    SolvedTracking st = solve_tracking(3, 3, 31, 0.4);
    const double v_a1 = st.objective;

    SUBCASE("without an exact optimum only the lower certificate is evaluated") {
        const RatioCertificates rc =
            theorem56_ratio(st.problem.spec, st.ex.a, st.ex.controls, v_a1, std::nullopt);
        CHECK(rc.lower.tag == "t6");
        CHECK(rc.lower.evaluated);
        CHECK(rc.lower.holds);
        CHECK(rc.upper.tag == "t5");
        CHECK_FALSE(rc.upper.evaluated);
    }
    SUBCASE("with an exact reference both sides are checked") {
        // Use the decoupled optimum itself as a (suboptimal) nested candidate;
        // its rollout value upper-bounds the nested optimum, which only makes
        // the lower certificate harder and keeps the upper one sound.
        const Trajectory traj = rollout_exact(st.problem.spec, st.ex.a, st.ex.controls);
        ExactReference exact{st.ex.a, st.ex.controls,
                             cumulative_error(traj, st.problem.spec)};
        const RatioCertificates rc =
            theorem56_ratio(st.problem.spec, st.ex.a, st.ex.controls, v_a1, exact);
        CHECK(rc.lower.evaluated);
        CHECK(rc.lower.holds);
        CHECK(rc.upper.evaluated);
        CHECK(rc.upper.holds);
    }
}

TEST_CASE("theorem7_certificate on a matrix-tracking solution") {
    IdealInstance inst = gen_ideal(4, 3, 41);
    std::vector<Vector> refs = perturb_refs(inst, NoiseSpec{0.0, 0.1}, 42);
    SystemSpec spec = with_references(inst.spec, refs);
    const double omega = 8.0;
    const double beta = 4 * 0.4;  // matches an entrywise box of 0.4 at n = 4
    MopulProblem problem = preset_amopul2(spec, inst.a_hat, inst.u_hat,
                                          theorem3_tighten(omega, beta, 3), {1.0});
    const ConicProgram program = build_amopul(problem);
    const Solution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ExtractedSolution ex = extract_solution(program, sol.x);
    const BoundCertificate cert =
        theorem7_certificate(spec, omega, beta, ex.a, ex.controls, sol.objective);
    CHECK(cert.tag == "t7");
    CHECK(cert.preconditions_ok);
    CHECK(cert.holds);
    CHECK(cert.bound_value == omega);
}
