#pragma once

#include <vector>

#include "mopul/linalg.hpp"

namespace mopul {

/// Norm used for per-stage output errors.
struct ErrorNorm {
    enum class Kind { Euclidean, WeightedQ };
    Kind kind = Kind::Euclidean;
    Matrix q;  // SPD weight, used when kind == WeightedQ

    static ErrorNorm euclidean() { return ErrorNorm{}; }
    static ErrorNorm weighted(Matrix q_in) {
        return ErrorNorm{Kind::WeightedQ, std::move(q_in)};
    }

    double operator()(const Vector& v) const {
        return kind == Kind::Euclidean ? v.norm() : q_norm(v, q);
    }
};

/// Fixed data of a finite-horizon linear system together with the
/// reference outputs r_1..r_N. r_0 is always C*x0.
struct SystemSpec {
    Index n = 0;  // state dimension
    Index m = 0;  // control dimension
    Index p = 0;  // output dimension
    Index horizon = 0;
    Matrix b;  // n x m
    Matrix c;  // p x n, full column rank
    Vector x0;
    std::vector<Vector> references;  // r_1..r_N

    SystemSpec() = default;
    SystemSpec(Matrix b_in, Matrix c_in, Vector x0_in, std::vector<Vector> refs);

    Vector r0() const { return c * x0; }
    const Vector& reference(Index t) const;  // r_t for t in 1..N
    /// r_{t} with r_0 = C x0 included, t in 0..N.
    Vector reference_or_r0(Index t) const;
};

struct Trajectory {
    std::vector<Vector> states;   // x_0..x_N
    std::vector<Vector> outputs;  // y_0..y_N
};

/// Nested iteration x_t = A x_{t-1} + B u_{t-1}.
Trajectory rollout_exact(const SystemSpec& spec, const Matrix& a,
                         const std::vector<Vector>& controls);

/// Decoupled iteration x_t = A C^+ r_{t-1} + B u_{t-1}.
Trajectory rollout_approx(const SystemSpec& spec, const Matrix& a,
                          const std::vector<Vector>& controls);

/// Same as rollout_approx but with the pseudoinverse supplied by the caller.
Trajectory rollout_approx(const SystemSpec& spec, const Matrix& a,
                          const std::vector<Vector>& controls, const Matrix& c_pinv);

/// Sum over t = 1..N of ||y_t - r_t|| under the selected norm.
double cumulative_error(const Trajectory& traj, const SystemSpec& spec,
                        const ErrorNorm& norm = ErrorNorm::euclidean());

/// Evaluates ||y_t - r_t||_2^2 through the explicit six-term polynomial
/// expansion in powers of A, without rolling out the state sequence.
double poly_error(const SystemSpec& spec, const Matrix& a,
                  const std::vector<Vector>& controls, Index t);

}  // namespace mopul
