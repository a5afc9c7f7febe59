#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mopul/model.hpp"

namespace mopul {

/// Per-solution guarantee record. `holds` compares the observed quantity
/// against the bound with a small relative slack; `preconditions_ok` is
/// false when the hypotheses could not be verified for the supplied
/// solution, in which case `holds` is still reported but carries no
/// guarantee.
struct BoundCertificate {
    std::string tag;  // t2, t3, t4, t5, t6, t7, r3, r5
    std::vector<std::pair<std::string, double>> inputs;
    double bound_value = 0.0;
    double observed_value = 0.0;
    bool holds = false;
    double slack = 0.0;
    bool preconditions_ok = true;
    bool evaluated = true;
    std::string note;
};

/// sum_{i=0}^{horizon-1} beta^i, with the beta = 0 case giving 1.
double geometric_sum(double beta, Index horizon);

/// ||C A C^+||_2, the per-stage error amplification factor of the
/// decoupled iteration.
double contraction_factor(const SystemSpec& spec, const Matrix& a);

/// Default amplification bound derived from an entrywise box on A:
/// every |a_ij| <= alpha implies ||A||_2 <= n*alpha, so
/// beta = n*alpha*||C||_2*||C^+||_2. Empty when the problem has no a_box.
std::optional<double> beta_from_box(const MopulProblem& problem);

/// Per-stage errors ||y^_t - r_t|| of the output-space nested iteration
/// y^_t = C A C^+ y^_{t-1} + C B u_{t-1}, y^_0 = C x0.
std::vector<double> decoupled_output_errors(const SystemSpec& spec, const Matrix& a,
                                            const std::vector<Vector>& controls);

/// Membership test for the accuracy set: decoupled_output_errors(t) <= eps_t.
bool in_z_epsilon(const SystemSpec& spec, const Matrix& a, const std::vector<Vector>& controls,
                  const std::vector<double>& eps, double tol = 0.0);

/// Exact-rollout cumulative error of a solved decoupled optimum is at most
/// (sum beta^i) * omega_u, where omega_u bounds its decoupled cumulative
/// error and beta bounds its amplification factor.
BoundCertificate theorem2_certificate(const SystemSpec& spec, const Matrix& a_opt,
                                      const std::vector<Vector>& u_opt, double beta,
                                      double omega_u,
                                      const ErrorNorm& norm = ErrorNorm::euclidean());

/// Tightened cumulative-error level omega_c / sum_{i=0}^{N-1} beta^i; a
/// decoupled solve at this level is exact-rollout feasible at level omega_c.
double theorem3_tighten(double omega_c, double beta, Index horizon);

/// (1 + gamma) * sum_{t=1}^{N-1} eps_t + eps_N.
double theorem4_bound(const std::vector<double>& eps, double gamma);

struct ExactReference {
    Matrix a;
    std::vector<Vector> controls;
    double value = 0.0;  // exact (nested) optimal objective
};

struct RatioCertificates {
    BoundCertificate lower;  // nested optimum <= (sum zeta^i) * decoupled optimum
    BoundCertificate upper;  // decoupled optimum <= (1 + gamma) * nested optimum
};

/// Sandwich between the nested and decoupled optimal values, evaluated at
/// a solved decoupled optimum. zeta and gamma are taken at the supplied
/// solutions, which only weakens each inequality. The upper certificate
/// needs an exact nested optimum and is marked unevaluated without one.
RatioCertificates theorem56_ratio(const SystemSpec& spec, const Matrix& a_opt,
                                  const std::vector<Vector>& u_opt, double v_a1,
                                  const std::optional<ExactReference>& exact_m1);

/// With the level tightened to omega / sum beta^i, any feasible solution
/// of the decoupled matrix-tracking problem is exact-rollout feasible at
/// level omega, and its Frobenius objective bounds the nested optimum.
BoundCertificate theorem7_certificate(const SystemSpec& spec, double omega, double beta,
                                      const Matrix& a_opt, const std::vector<Vector>& u_opt,
                                      double frobenius_objective);

/// Tightened level for a Q-weighted cumulative error, from the
/// norm-equivalence constants eta1 = 1/sqrt(lmax(Q)), eta2 = 1/sqrt(lmin(Q)).
double remark3_level(double omega_c, double beta, Index horizon, const Matrix& q);

}  // namespace mopul
