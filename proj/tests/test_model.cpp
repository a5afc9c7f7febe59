#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mopul/model.hpp"
#include "mopul/rng.hpp"

using namespace mopul;

namespace {

SystemSpec identity_spec(Rng& rng, Index n, Index horizon) {
    std::vector<Vector> refs;
    for (Index t = 0; t < horizon; ++t) refs.push_back(rng.uniform_vector(n, -1.0, 1.0));
    return SystemSpec(Matrix::Identity(n, n), Matrix::Identity(n, n),
                      rng.uniform_vector(n, -0.5, 0.5), refs);
}

}  // namespace

TEST_CASE("svec and smat round trip and preserve inner products") {
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const Index side = 1 + static_cast<Index>(rng.next_u64() % 5);
        Matrix s = rng.normal_matrix(side, side, 0.0, 1.0);
        s = ((s + s.transpose()) / 2.0).eval();
        Matrix t = rng.normal_matrix(side, side, 0.0, 1.0);
        t = ((t + t.transpose()) / 2.0).eval();
        CHECK(svec(s).size() == svec_dim(side));
        CHECK((smat(svec(s), side) - s).norm() <= 1e-14 * std::max(1.0, s.norm()));
        // <S, T>_F must equal the packed dot product (sqrt(2) off-diagonals).
        CHECK(svec(s).dot(svec(t)) ==
              doctest::Approx((s * t).trace()).epsilon(1e-12));
    }
}

TEST_CASE("extract_solution inverts the variable packing") {
    Rng rng(71);
    SystemSpec spec = identity_spec(rng, 3, 4);
    MopulProblem problem = preset_amopul1_box(spec);
    const ConicProgram program = build_amopul(problem);
    const VariableMap& vars = program.vars;

    Vector x = Vector::Zero(program.num_vars);
    const Matrix a = rng.normal_matrix(3, 3, 0.0, 0.1);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) x(vars.a_offset + i * 3 + j) = a(i, j);
    }
    std::vector<Vector> controls;
    for (Index t = 0; t < 4; ++t) {
        controls.push_back(rng.uniform_vector(3, -0.5, 0.5));
        x.segment(vars.u_offset + t * 3, 3) = controls.back();
    }
    REQUIRE(vars.omega_index >= 0);
    x(vars.omega_index) = 1.25;

    const ExtractedSolution ex = extract_solution(program, x);
    CHECK((ex.a - a).norm() == 0.0);
    CHECK(ex.omega == 1.25);
    REQUIRE(ex.controls.size() == 4);
    for (Index t = 0; t < 4; ++t) CHECK(ex.controls[t] == controls[t]);
    CHECK(ex.xi.size() == 4);
}

TEST_CASE("arrow matrix is PSD exactly when the norm bound holds") {
    // [[xi I, v], [v', xi]] >= 0  <=>  ||v|| <= xi, checked by eigenvalues.
    Rng rng(81);
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Index p = 1 + static_cast<Index>(rng.next_u64() % 5);
        Vector v;
        double xi;
        switch (trial % 5) {
            case 0: v = Vector::Zero(p); xi = 0.0; break;
            case 1: v = rng.normal_vector(p, 0.0, 1.0); xi = 0.0; break;
            case 2: v = Vector::Zero(p); xi = rng.next_uniform(0.0, 2.0); break;
            default: {
                v = rng.normal_vector(p, 0.0, 1.0);
                double f = rng.next_uniform(0.0, 2.0);
                if (std::abs(f - 1.0) < 1e-6) f = 1.0;  // keep away from the knife edge
                xi = f * v.norm();
                break;
            }
        }
        Matrix arrow = Matrix::Zero(p + 1, p + 1);
        arrow.topLeftCorner(p, p) = xi * Matrix::Identity(p, p);
        arrow.topRightCorner(p, 1) = v;
        arrow.bottomLeftCorner(1, p) = v.transpose();
        arrow(p, p) = xi;
        const bool psd = sym_eigs(arrow)(0) >= -1e-9;
        const bool in_cone = v.norm() <= xi + 1e-9;
        CHECK(psd == in_cone);
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("check_constraints reports signed margins") {
    Rng rng(91);
    SystemSpec spec = identity_spec(rng, 2, 2);
    MopulProblem problem = preset_amopul1_box(spec, 0.4, 0.5);

    const Matrix inside = Matrix::Constant(2, 2, 0.1);
    const std::vector<Vector> u = {Vector::Zero(2), Vector::Zero(2)};
    for (const ConstraintMargin& m : check_constraints(problem, inside, u, 100.0)) {
        CHECK(m.margin >= -1e-12);
    }

    Matrix outside = inside;
    outside(0, 0) = 0.7;  // above the 0.4 box
    double worst = 0.0;
    for (const ConstraintMargin& m : check_constraints(problem, outside, u, 100.0)) {
        worst = std::min(worst, m.margin);
    }
    CHECK(worst == doctest::Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("validate rejects inconsistent problems") {
    Rng rng(92);
    SystemSpec spec = identity_spec(rng, 2, 2);
    MopulProblem problem = preset_amopul1_box(spec);
    CHECK_NOTHROW(problem.validate());

    MopulProblem bad = problem;
    bad.constraints.a_box->lower = Matrix::Zero(3, 3);  // wrong shape
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    MopulProblem bad2 = problem;
    bad2.spec.references.pop_back();
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("soc and lmi lowerings share variables but differ in cones") {
    Rng rng(93);
    SystemSpec spec = identity_spec(rng, 3, 3);
    MopulProblem problem = preset_amopul1_box(spec);
    const ConicProgram soc = build_amopul(problem, ProgramForm::Soc);
    const ConicProgram lmi = build_amopul(problem, ProgramForm::Lmi);
    CHECK(soc.num_vars == lmi.num_vars);
    int soc_blocks = 0, psd_blocks = 0;
    for (const ConeBlock& b : soc.cone_blocks) soc_blocks += b.type == ConeType::SecondOrder;
    for (const ConeBlock& b : lmi.cone_blocks) psd_blocks += b.type == ConeType::Psd;
    CHECK(soc_blocks >= 3);   // one per stage error at least
    CHECK(psd_blocks >= 3);
    for (const ConeBlock& b : lmi.cone_blocks) {
        if (b.type == ConeType::Psd) CHECK(b.dim == svec_dim(b.side));
    }
}

TEST_CASE("markov preset builds a column-stochastic estimation problem") {
    Rng rng(94);
    std::vector<Vector> obs;
    for (int t = 0; t < 4; ++t) {
        Vector v = rng.uniform_vector(3, 0.0, 1.0);
        obs.push_back(v / v.sum());
    }
    MopulProblem problem = preset_markov(3, 0.9, obs);
    CHECK_NOTHROW(problem.validate());
    CHECK(problem.constraints.stochastic_columns);
    CHECK(problem.spec.horizon == 3);  // first observation is the initial distribution
    CHECK(problem.spec.n == 3);
}
