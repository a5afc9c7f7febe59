#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mopul/system.hpp"

namespace mopul {

// ---------------------------------------------------------------------------
// Problem data model
// ---------------------------------------------------------------------------

struct FrobeniusDistance {
    Matrix a_ref;
};

/// Weighted objective lambda1*f1(A) + lambda2*f2(U) + lambda3*f3(omega).
/// f1 is either zero or ||A - A_ref||_F, f2 is either zero or the control
/// effort sum_{t=1..N-1} ||u_t - u_{t-1}||_2, f3 is either zero or omega.
struct ObjectiveSpec {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::optional<FrobeniusDistance> f1;
    bool f2_control_effort = false;
    bool f3_identity = false;
};

struct BoxBounds {
    Matrix lower;
    Matrix upper;
};

struct ControlBox {
    Vector lower;
    Vector upper;  // applied to every stage
};

struct UBall {
    Vector center;
    double radius = 0.0;
};

/// sum_k coeff_k * A(i_k, j_k) <= rhs
struct LinearIneq {
    struct Term {
        Index row;
        Index col;
        double coeff;
    };
    std::vector<Term> terms;
    double rhs = 0.0;
    std::string label;
};

/// Inequality over the technical-coefficient blocks G and H of an
/// input-output transition matrix A = [[I-G, O], [-H, I]].
struct GhIneq {
    struct Term {
        enum class Block { G, H };
        Block block;
        Index row;
        Index col;
        double coeff;
    };
    std::vector<Term> terms;
    double rhs = 0.0;
    std::string label;
};

struct IoStructure {
    Index m1 = 0;
    Index m2 = 0;
    std::vector<GhIneq> ineqs;
};

enum class OmegaMode { Variable, Fixed };

struct ConstraintSet {
    std::optional<BoxBounds> a_box;
    std::optional<ControlBox> u_box;
    // Component-wise rate bounds lower <= u_t - u_{t-1} <= upper, t=1..N-1.
    std::optional<std::pair<Vector, Vector>> u_rate;
    std::vector<UBall> u_balls;  // empty or one per stage
    OmegaMode omega_mode = OmegaMode::Variable;
    double omega_fixed = 0.0;          // used when omega_mode == Fixed
    double omega_upper = 1e4;          // bound on variable omega
    std::vector<LinearIneq> a_linear;
    bool stochastic_columns = false;   // A >= 0 entrywise, columns sum to 1
    std::optional<double> nuclear_ball;
    std::optional<IoStructure> io;
};

struct MopulProblem {
    SystemSpec spec;
    ObjectiveSpec objective;
    ConstraintSet constraints;
    ErrorNorm error_norm;

    /// Throws std::invalid_argument on dimension or invariant violations.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Standard-form cone program
// ---------------------------------------------------------------------------

enum class ConeType { Zero, Nonneg, SecondOrder, Psd };

struct ConeBlock {
    ConeType type;
    Index dim;       // number of packed rows
    Index side = 0;  // matrix side for Psd (dim == side*(side+1)/2)
};

/// Variable packing: A row-major, then U stage-major, then omega (if
/// variable), then xi_1..xi_N, then auxiliaries.
struct VariableMap {
    Index num_vars = 0;
    Index n = 0, m = 0, p = 0, horizon = 0;
    Index a_offset = 0;
    Index u_offset = 0;
    Index omega_index = -1;  // -1 when omega is fixed
    double omega_fixed = 0.0;
    Index xi_offset = 0;
    Index f1_epi = -1;
    Index f2_epi_offset = -1;       // N-1 consecutive vars
    Index w_offset = -1;            // packed upper triangles of W1 then W2
    Index w_side = 0;
};

/// minimize objective_coeffs . x  s.t.  constraint_matrix x + s = offsets,
/// s in the product cone described by cone_blocks.
struct ConicProgram {
    Index num_vars = 0;
    Vector objective_coeffs;
    Matrix constraint_matrix;
    Vector offsets;
    std::vector<ConeBlock> cone_blocks;
    VariableMap vars;

    Index total_rows() const { return constraint_matrix.rows(); }
};

enum class ProgramForm { Soc, Lmi };

/// Lowers a MopulProblem to a standard-form cone program. The Soc form
/// encodes each stage error as a second-order cone; the Lmi form encodes it
/// as an arrow-shaped PSD block of side p+1.
ConicProgram build_amopul(const MopulProblem& problem, ProgramForm form = ProgramForm::Soc);

struct ExtractedSolution {
    Matrix a;
    std::vector<Vector> controls;
    double omega = 0.0;
    Vector xi;
};

/// Inverse of the variable packing.
ExtractedSolution extract_solution(const ConicProgram& program, const Vector& x);

/// Post-hoc constraint margins for a candidate (A, U, omega), computed by
/// direct evaluation against the problem data (no conic machinery).
/// margin >= -tol means satisfied.
struct ConstraintMargin {
    std::string name;
    double margin;
};
std::vector<ConstraintMargin> check_constraints(const MopulProblem& problem, const Matrix& a,
                                                const std::vector<Vector>& controls,
                                                double omega);

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

MopulProblem preset_mpc(SystemSpec spec, double lambda, ConstraintSet extra = {});
MopulProblem preset_covid(SystemSpec spec, ConstraintSet extra = {});
MopulProblem preset_markov(Index num_states, double alpha,
                           const std::vector<Vector>& observations,
                           std::vector<LinearIneq> extra_ineqs = {});
MopulProblem preset_io1(Index m1, Index m2, Vector x0, std::vector<Vector> refs,
                        std::vector<GhIneq> io_ineqs);
MopulProblem preset_io2(Index m1, Index m2, Vector x0, std::vector<Vector> refs, Matrix a_ref,
                        std::vector<Vector> u_refs, double omega, std::vector<double> omega_t,
                        std::vector<GhIneq> io_ineqs);
MopulProblem preset_amopul1_box(SystemSpec spec, double a_bound = 0.4, double u_bound = 0.5);
MopulProblem preset_amopul2(SystemSpec spec, Matrix a_ref, std::vector<Vector> u_refs,
                            double omega_tilde, std::vector<double> omega_t);

// ---------------------------------------------------------------------------
// Symmetric packing helpers (svec with sqrt(2)-scaled off-diagonals)
// ---------------------------------------------------------------------------

Index svec_dim(Index side);
Vector svec(const Matrix& m);
Matrix smat(const Vector& v, Index side);

}  // namespace mopul
