#include "mopul/system.hpp"

#include <sstream>

namespace mopul {

namespace {

void check_controls(const SystemSpec& spec, const std::vector<Vector>& controls) {
    if (static_cast<Index>(controls.size()) != spec.horizon) {
        std::ostringstream os;
        os << "expected " << spec.horizon << " controls, got " << controls.size();
        throw std::invalid_argument(os.str());
    }
    for (const Vector& u : controls) {
        if (u.size() != spec.m) {
            std::ostringstream os;
            os << "control of dim " << u.size() << " does not match m=" << spec.m;
            throw std::invalid_argument(os.str());
        }
    }
}

void check_transition(const SystemSpec& spec, const Matrix& a) {
    if (a.rows() != spec.n || a.cols() != spec.n) {
        std::ostringstream os;
        os << "transition matrix is " << a.rows() << "x" << a.cols() << ", expected "
           << spec.n << "x" << spec.n;
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

SystemSpec::SystemSpec(Matrix b_in, Matrix c_in, Vector x0_in, std::vector<Vector> refs)
    : b(std::move(b_in)), c(std::move(c_in)), x0(std::move(x0_in)), references(std::move(refs)) {
    n = b.rows();
    m = b.cols();
    p = c.rows();
    horizon = static_cast<Index>(references.size());
    require_finite(b, "B");
    require_finite(c, "C");
    require_finite(x0, "x0");
    if (c.cols() != n) throw std::invalid_argument("C column count does not match state dimension");
    if (x0.size() != n) throw std::invalid_argument("x0 dimension does not match state dimension");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (matrix_rank(c) != n) throw std::invalid_argument("C must have full column rank");
    for (const Vector& r : references) {
        require_finite(r, "reference");
        if (r.size() != p) throw std::invalid_argument("reference dimension does not match p");
    }
}

const Vector& SystemSpec::reference(Index t) const {
    if (t < 1 || t > horizon) throw std::out_of_range("reference stage out of range");
    return references[static_cast<size_t>(t - 1)];
}

Vector SystemSpec::reference_or_r0(Index t) const {
    if (t == 0) return r0();
    return reference(t);
}

Trajectory rollout_exact(const SystemSpec& spec, const Matrix& a,
                         const std::vector<Vector>& controls) {
    check_transition(spec, a);
    check_controls(spec, controls);
    Trajectory traj;
    traj.states.reserve(spec.horizon + 1);
    traj.outputs.reserve(spec.horizon + 1);
    traj.states.push_back(spec.x0);
    traj.outputs.push_back(spec.c * spec.x0);
    for (Index t = 1; t <= spec.horizon; ++t) {
        Vector x = a * traj.states.back() + spec.b * controls[static_cast<size_t>(t - 1)];
        traj.outputs.push_back(spec.c * x);
        traj.states.push_back(std::move(x));
    }
    return traj;
}

Trajectory rollout_approx(const SystemSpec& spec, const Matrix& a,
                          const std::vector<Vector>& controls, const Matrix& c_pinv) {
    check_transition(spec, a);
    check_controls(spec, controls);
    Trajectory traj;
    traj.states.reserve(spec.horizon + 1);
    traj.outputs.reserve(spec.horizon + 1);
    traj.states.push_back(spec.x0);
    traj.outputs.push_back(spec.c * spec.x0);
    for (Index t = 1; t <= spec.horizon; ++t) {
        const Vector r_prev = spec.reference_or_r0(t - 1);
        Vector x = a * (c_pinv * r_prev) + spec.b * controls[static_cast<size_t>(t - 1)];
        traj.outputs.push_back(spec.c * x);
        traj.states.push_back(std::move(x));
    }
    return traj;
}

Trajectory rollout_approx(const SystemSpec& spec, const Matrix& a,
                          const std::vector<Vector>& controls) {
    return rollout_approx(spec, a, controls, pinv(spec.c));
}

double cumulative_error(const Trajectory& traj, const SystemSpec& spec, const ErrorNorm& norm) {
    if (static_cast<Index>(traj.outputs.size()) != spec.horizon + 1) {
        throw std::invalid_argument("trajectory length does not match spec horizon");
    }
    double total = 0.0;
    for (Index t = 1; t <= spec.horizon; ++t) {
        total += norm(traj.outputs[static_cast<size_t>(t)] - spec.reference(t));
    }
    return total;
}

double poly_error(const SystemSpec& spec, const Matrix& a,
                  const std::vector<Vector>& controls, Index t) {
    check_transition(spec, a);
    check_controls(spec, controls);
    if (t < 1 || t > spec.horizon) throw std::out_of_range("poly_error stage out of range");

    // Powers A^0..A^t, memoized by repeated multiplication.
    std::vector<Matrix> pow;
    pow.reserve(static_cast<size_t>(t) + 1);
    pow.push_back(Matrix::Identity(spec.n, spec.n));
    for (Index j = 1; j <= t; ++j) pow.push_back(a * pow.back());

    const Matrix ctc = spec.c.transpose() * spec.c;
    const Vector& r_t = spec.reference(t);
    const Vector ct_r = spec.c.transpose() * r_t;
    auto u = [&](Index idx) -> const Vector& { return controls[static_cast<size_t>(idx)]; };

    const Vector at_x0 = pow[static_cast<size_t>(t)] * spec.x0;

    double value = at_x0.dot(ctc * at_x0);
    for (Index j = 0; j < t; ++j) {
        value += 2.0 * at_x0.dot(ctc * (pow[static_cast<size_t>(j)] * (spec.b * u(t - 1 - j))));
    }
    for (Index i = 0; i < t; ++i) {
        const Vector bi = pow[static_cast<size_t>(i)] * (spec.b * u(t - 1 - i));
        for (Index j = 0; j < t; ++j) {
            const Vector bj = pow[static_cast<size_t>(j)] * (spec.b * u(t - 1 - j));
            value += bi.dot(ctc * bj);
        }
    }
    value -= 2.0 * at_x0.dot(ct_r);
    for (Index i = 0; i < t; ++i) {
        value -= 2.0 * (pow[static_cast<size_t>(i)] * (spec.b * u(t - 1 - i))).dot(ct_r);
    }
    value += r_t.dot(r_t);
    return value;
}

}  // namespace mopul
