#pragma once

#include <iosfwd>

#include "mopul/model.hpp"

namespace mopul {

struct SolverConfig {
    double tol_primal = 1e-8;
    double tol_dual = 1e-8;
    double tol_gap = 1e-8;
    int max_iters = 200;
    Index psd_side_cap = 50;
    std::ostream* trace = nullptr;  // one line per iteration when set
};

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    NumericalFailure,
};

const char* to_string(SolveStatus status);

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Vector x;
    Vector slacks;  // per program row; zero on Zero-cone rows
    Vector duals;   // per program row; equality multipliers on Zero-cone rows
    double objective = 0.0;
    Residuals residuals;
    int iterations = 0;
    // Improving-ray certificates, populated for the matching status:
    // PrimalInfeasible: dual ray in `duals` normalized so b'y + h'z = -1.
    // DualInfeasible: primal ray in `x` normalized so c'x = -1.
    bool has_certificate = false;
    std::string failure_detail;
};

/// Homogeneous self-dual interior-point solve. Deterministic for
/// identical inputs and configuration.
Solution solve(const ConicProgram& program, const SolverConfig& config = SolverConfig{});

/// Residual report recomputed from program data alone, independent of the
/// solve loop internals.
struct KktReport {
    double primal_residual = 0.0;  // inf-norm over all rows of G x + s - h
    double dual_residual = 0.0;    // inf-norm of G' z + c
    double gap = 0.0;              // |c'x + h'z| (duality gap surrogate)
    double slack_cone_margin = 0.0;  // min over blocks; >= 0 means inside
    double dual_cone_margin = 0.0;
    // For infeasibility certificates: residual of the Farkas inequality.
    double certificate_residual = 0.0;
};

KktReport check_kkt(const ConicProgram& program, const Solution& solution);

}  // namespace mopul
