#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mopul/experiments.hpp"
#include "mopul/solver.hpp"

using namespace mopul;

#include "analytic_library.hpp"

using mopul::testing::Analytic;
using mopul::testing::analytic_library;

TEST_CASE("analytic instances solve to high accuracy with clean kkt residuals") {
    const auto lib = analytic_library();
    CHECK(lib.size() >= 10);
    for (const Analytic& inst : lib) {
        CAPTURE(inst.name);
        const Solution sol = solve(inst.program);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(std::abs(sol.objective - inst.optimum) <=
              1e-7 * std::max(1.0, std::abs(inst.optimum)));
        const KktReport rep = check_kkt(inst.program, sol);
        CHECK(rep.primal_residual <= 1e-7);
        CHECK(rep.dual_residual <= 1e-7);
        CHECK(rep.gap <= 1e-6);
        CHECK(rep.slack_cone_margin >= -1e-9);
        CHECK(rep.dual_cone_margin >= -1e-9);
    }
}

TEST_CASE("primal infeasibility yields a verifying Farkas certificate") {
    ConicProgram p;  // x >= 1 and x <= 0
    p.num_vars = 1;
    p.objective_coeffs = Vector::Zero(1);
    p.constraint_matrix = Matrix::Zero(2, 1);
    p.constraint_matrix(0, 0) = -1.0;
    p.constraint_matrix(1, 0) = 1.0;
    p.offsets = Vector::Zero(2);
    p.offsets(0) = -1.0;
    p.cone_blocks = {{ConeType::Nonneg, 2, 0}};
    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::PrimalInfeasible);
    CHECK(sol.has_certificate);
    const KktReport rep = check_kkt(p, sol);
    CHECK(rep.certificate_residual <= 1e-7);
}

TEST_CASE("unbounded problems report dual infeasibility with an improving ray") {
    ConicProgram p;  // min -x s.t. x >= 0
    p.num_vars = 1;
    p.objective_coeffs = -Vector::Ones(1);
    p.constraint_matrix = Matrix::Constant(1, 1, -1.0);
    p.offsets = Vector::Zero(1);
    p.cone_blocks = {{ConeType::Nonneg, 1, 0}};
    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::DualInfeasible);
    CHECK(sol.has_certificate);
    const KktReport rep = check_kkt(p, sol);
    CHECK(rep.certificate_residual <= 1e-7);
}

TEST_CASE("solves are deterministic") {
    IdealInstance inst = gen_ideal(4, 3, 17);
    std::vector<Vector> refs = perturb_refs(inst, NoiseSpec{0.0, 0.3}, 5);
    MopulProblem problem = preset_amopul1_box(with_references(inst.spec, refs));
    const ConicProgram program = build_amopul(problem);
    const Solution a = solve(program);
    const Solution b = solve(program);
    REQUIRE(a.status == SolveStatus::Optimal);
    CHECK(a.x == b.x);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("psd side cap is enforced") {
    ConicProgram p;
    p.num_vars = 3;
    p.objective_coeffs = svec(Matrix::Identity(2, 2));
    p.constraint_matrix = -Matrix::Identity(3, 3);
    p.offsets = -svec(Matrix::Identity(2, 2));
    p.cone_blocks = {{ConeType::Psd, 3, 2}};
    SolverConfig cfg;
    cfg.psd_side_cap = 1;
    CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
}
