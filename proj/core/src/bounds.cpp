#include "mopul/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mopul {

namespace {

constexpr double kHoldSlack = 1e-7;

void finalize(BoundCertificate& cert) {
    cert.slack = cert.bound_value - cert.observed_value;
    cert.holds =
        cert.observed_value <= cert.bound_value + kHoldSlack * std::max(1.0, cert.bound_value);
}

}  // namespace

double geometric_sum(double beta, Index horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    double sum = 1.0;
    double pw = 1.0;
    for (Index i = 1; i < horizon; ++i) {
        pw *= beta;
        sum += pw;
    }
    return sum;
}

double contraction_factor(const SystemSpec& spec, const Matrix& a) {
    if (a.rows() != spec.n || a.cols() != spec.n) {
        throw std::invalid_argument("transition matrix dimension mismatch");
    }
    return spectral_norm(spec.c * a * pinv(spec.c));
}

std::optional<double> beta_from_box(const MopulProblem& problem) {
    if (!problem.constraints.a_box) return std::nullopt;
    const BoxBounds& box = *problem.constraints.a_box;
    const double alpha =
        std::max(box.lower.cwiseAbs().maxCoeff(), box.upper.cwiseAbs().maxCoeff());
    // An entrywise bound alpha only gives ||A||_2 <= n*alpha; the factor n
    // keeps the resulting beta a genuine upper bound.
    const double n = static_cast<double>(problem.spec.n);
    return n * alpha * spectral_norm(problem.spec.c) * spectral_norm(pinv(problem.spec.c));
}

std::vector<double> decoupled_output_errors(const SystemSpec& spec, const Matrix& a,
                                            const std::vector<Vector>& controls) {
    if (static_cast<Index>(controls.size()) != spec.horizon) {
        throw std::invalid_argument("control count does not match horizon");
    }
    const Matrix amp = spec.c * a * pinv(spec.c);
    const Matrix cb = spec.c * spec.b;
    std::vector<double> errs;
    errs.reserve(static_cast<size_t>(spec.horizon));
    Vector y = spec.c * spec.x0;
    for (Index t = 1; t <= spec.horizon; ++t) {
        y = amp * y + cb * controls[static_cast<size_t>(t - 1)];
        errs.push_back((y - spec.reference(t)).norm());
    }
    return errs;
}

bool in_z_epsilon(const SystemSpec& spec, const Matrix& a, const std::vector<Vector>& controls,
                  const std::vector<double>& eps, double tol) {
    if (static_cast<Index>(eps.size()) != spec.horizon) {
        throw std::invalid_argument("epsilon count does not match horizon");
    }
    const std::vector<double> errs = decoupled_output_errors(spec, a, controls);
    for (size_t t = 0; t < errs.size(); ++t) {
        if (errs[t] > eps[t] + tol) return false;
    }
    return true;
}

BoundCertificate theorem2_certificate(const SystemSpec& spec, const Matrix& a_opt,
                                      const std::vector<Vector>& u_opt, double beta,
                                      double omega_u, const ErrorNorm& norm) {
    BoundCertificate cert;
    cert.tag = "t2";
    const double zeta = contraction_factor(spec, a_opt);
    const double approx_ce =
        cumulative_error(rollout_approx(spec, a_opt, u_opt), spec, norm);
    cert.inputs = {{"beta", beta}, {"omega_u", omega_u}, {"contraction", zeta},
                   {"approx_error", approx_ce}};

    cert.preconditions_ok = true;
    if (zeta > beta * (1.0 + 1e-9) + 1e-12) {
        cert.preconditions_ok = false;
        cert.note = "amplification factor of the solution exceeds beta";
    }
    if (approx_ce > omega_u + kHoldSlack * std::max(1.0, omega_u)) {
        cert.preconditions_ok = false;
        cert.note += cert.note.empty() ? "" : "; ";
        cert.note += "omega_u does not bound the decoupled cumulative error";
    }

    cert.bound_value = geometric_sum(beta, spec.horizon) * omega_u;
    cert.observed_value = cumulative_error(rollout_exact(spec, a_opt, u_opt), spec, norm);
    finalize(cert);
    return cert;
}

double theorem3_tighten(double omega_c, double beta, Index horizon) {
    if (omega_c <= 0.0) throw std::invalid_argument("control level must be positive");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    return omega_c / geometric_sum(beta, horizon);
}

double theorem4_bound(const std::vector<double>& eps, double gamma) {
    if (eps.empty()) throw std::invalid_argument("need at least one epsilon");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    double head = 0.0;
    for (size_t t = 0; t + 1 < eps.size(); ++t) {
        if (eps[t] < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
        head += eps[t];
    }
    if (eps.back() < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
    return (1.0 + gamma) * head + eps.back();
}

RatioCertificates theorem56_ratio(const SystemSpec& spec, const Matrix& a_opt,
                                  const std::vector<Vector>& u_opt, double v_a1,
                                  const std::optional<ExactReference>& exact_m1) {
    RatioCertificates pair;

    // Nested value is bounded through the solved decoupled optimum: its own
    // exact rollout already dominates the nested optimum, so the observable
    // check is the stronger one.
    BoundCertificate& lo = pair.lower;
    lo.tag = "t6";
    const double zeta = contraction_factor(spec, a_opt);
    lo.bound_value = geometric_sum(zeta, spec.horizon) * v_a1;
    lo.observed_value = exact_m1
                            ? exact_m1->value
                            : cumulative_error(rollout_exact(spec, a_opt, u_opt), spec);
    lo.inputs = {{"zeta", zeta}, {"v_a1", v_a1}};
    lo.note = exact_m1 ? "observed is the exact nested optimum"
                       : "observed is the rollout of the decoupled optimum, which "
                         "dominates the nested optimum";
    finalize(lo);

    BoundCertificate& up = pair.upper;
    up.tag = "t5";
    if (!exact_m1) {
        up.evaluated = false;
        up.note = "no exact nested optimum supplied";
        return pair;
    }
    // The exact optimum itself is a member of the accuracy set built from
    // its own decoupled errors, so its amplification factor bounds gamma.
    const double gamma = contraction_factor(spec, exact_m1->a);
    const std::vector<double> eps =
        decoupled_output_errors(spec, exact_m1->a, exact_m1->controls);
    if (!in_z_epsilon(spec, exact_m1->a, exact_m1->controls, eps, 1e-12)) {
        up.preconditions_ok = false;
        up.note = "accuracy-set membership check failed";
    }
    up.bound_value = (1.0 + gamma) * exact_m1->value;
    up.observed_value = v_a1;
    up.inputs = {{"gamma", gamma}, {"v_m1", exact_m1->value}};
    finalize(up);
    return pair;
}

BoundCertificate theorem7_certificate(const SystemSpec& spec, double omega, double beta,
                                      const Matrix& a_opt, const std::vector<Vector>& u_opt,
                                      double frobenius_objective) {
    BoundCertificate cert;
    cert.tag = "t7";
    const double omega_tilde = theorem3_tighten(omega, beta, spec.horizon);
    const double zeta = contraction_factor(spec, a_opt);
    const double approx_ce = cumulative_error(rollout_approx(spec, a_opt, u_opt), spec);
    cert.inputs = {{"omega", omega},
                   {"beta", beta},
                   {"omega_tilde", omega_tilde},
                   {"contraction", zeta},
                   {"approx_error", approx_ce},
                   {"frobenius_objective", frobenius_objective}};

    cert.preconditions_ok = true;
    if (zeta > beta * (1.0 + 1e-9) + 1e-12) {
        cert.preconditions_ok = false;
        cert.note = "amplification factor of the solution exceeds beta";
    }
    if (approx_ce > omega_tilde + kHoldSlack * std::max(1.0, omega_tilde)) {
        cert.preconditions_ok = false;
        cert.note += cert.note.empty() ? "" : "; ";
        cert.note += "solution is not feasible at the tightened level";
    }

    cert.bound_value = omega;
    cert.observed_value = cumulative_error(rollout_exact(spec, a_opt, u_opt), spec);
    finalize(cert);
    return cert;
}

double remark3_level(double omega_c, double beta, Index horizon, const Matrix& q) {
    if (omega_c <= 0.0) throw std::invalid_argument("control level must be positive");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    const Vector eigs = sym_eigs(q);
    if (eigs.minCoeff() <= 0.0) throw std::invalid_argument("Q must be positive definite");
    const double eta1 = 1.0 / std::sqrt(eigs.maxCoeff());
    const double eta2 = 1.0 / std::sqrt(eigs.minCoeff());

    const double ratio = eta2 / eta1;
    double denom = std::pow(ratio * beta, static_cast<double>(horizon - 1));
    double pw_beta = 1.0, pw_ratio = ratio;
    for (Index i = 0; i <= horizon - 2; ++i) {
        denom += pw_ratio * pw_beta;
        pw_beta *= beta;
        pw_ratio *= ratio;
    }
    return omega_c / denom;
}

}  // namespace mopul
