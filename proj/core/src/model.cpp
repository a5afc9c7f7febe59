#include "mopul/model.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <sstream>

namespace mopul {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kDegenerateBound = 1e-14;

Index tri(Index side) { return side * (side + 1) / 2; }

// Packed upper-triangle index (row-major, i <= j) for an auxiliary
// symmetric-matrix variable block.
Index upper_index(Index i, Index j, Index side) {
    return i * side - i * (i - 1) / 2 + (j - i);
}

struct Builder {
    Index num_vars;
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> offsets;
    std::vector<ConeBlock> blocks;
    Index row = 0;

    explicit Builder(Index nv) : num_vars(nv) {}

    void coeff(Index var, double value) {
        if (value != 0.0) trips.emplace_back(static_cast<int>(row), static_cast<int>(var), value);
    }
    void finish_row(double offset) {
        offsets.push_back(offset);
        ++row;
    }
    void block(ConeType type, Index dim, Index side = 0) {
        if (dim > 0) blocks.push_back(ConeBlock{type, dim, side});
    }
};

}  // namespace

Index svec_dim(Index side) { return tri(side); }

Vector svec(const Matrix& m) {
    const Index s = m.rows();
    Vector v(tri(s));
    Index k = 0;
    for (Index i = 0; i < s; ++i) {
        for (Index j = i; j < s; ++j) {
            v(k++) = (i == j) ? m(i, j) : kSqrt2 * m(i, j);
        }
    }
    return v;
}

Matrix smat(const Vector& v, Index side) {
    Matrix m(side, side);
    Index k = 0;
    for (Index i = 0; i < side; ++i) {
        for (Index j = i; j < side; ++j) {
            const double x = (i == j) ? v(k) : v(k) / kSqrt2;
            m(i, j) = x;
            m(j, i) = x;
            ++k;
        }
    }
    return m;
}

void MopulProblem::validate() const {
    const Index n = spec.n, m = spec.m, horizon = spec.horizon;

    if (static_cast<Index>(spec.references.size()) != horizon) {
        throw std::invalid_argument("reference count must equal the horizon");
    }
    for (const Vector& r : spec.references) {
        if (r.size() != spec.p) throw std::invalid_argument("references must have dim p");
    }

    const bool f1_active = objective.lambda1 > 0.0 && objective.f1.has_value();
    const bool f2_active = objective.lambda2 > 0.0 && objective.f2_control_effort;
    const bool f3_active = objective.lambda3 > 0.0 && objective.f3_identity &&
                           constraints.omega_mode == OmegaMode::Variable;
    if (objective.lambda1 < 0 || objective.lambda2 < 0 || objective.lambda3 < 0) {
        throw std::invalid_argument("objective weights must be nonnegative");
    }
    if (!f1_active && !f2_active && !f3_active) {
        throw std::invalid_argument("empty objective: no non-constant term is active");
    }
    if (f1_active) {
        const Matrix& a_ref = objective.f1->a_ref;
        if (a_ref.rows() != n || a_ref.cols() != n) {
            throw std::invalid_argument("f1 reference matrix must be n x n");
        }
        require_finite(a_ref, "A_ref");
    }

    if (constraints.a_box) {
        const auto& box = *constraints.a_box;
        if (box.lower.rows() != n || box.lower.cols() != n || box.upper.rows() != n ||
            box.upper.cols() != n) {
            throw std::invalid_argument("A box bounds must be n x n");
        }
        if (((box.upper - box.lower).array() < 0).any()) {
            throw std::invalid_argument("A box has lower > upper");
        }
    }
    if (constraints.u_box) {
        const auto& box = *constraints.u_box;
        if (box.lower.size() != m || box.upper.size() != m) {
            throw std::invalid_argument("u box bounds must have dim m");
        }
        if (((box.upper - box.lower).array() < 0).any()) {
            throw std::invalid_argument("u box has lower > upper");
        }
    }
    if (constraints.u_rate) {
        if (constraints.u_rate->first.size() != m || constraints.u_rate->second.size() != m) {
            throw std::invalid_argument("u rate bounds must have dim m");
        }
    }
    if (!constraints.u_balls.empty()) {
        if (static_cast<Index>(constraints.u_balls.size()) != horizon) {
            throw std::invalid_argument("u_balls must have one entry per stage");
        }
        for (const UBall& ball : constraints.u_balls) {
            if (ball.center.size() != m) throw std::invalid_argument("u ball center must have dim m");
            if (ball.radius < 0) throw std::invalid_argument("u ball radius must be nonnegative");
        }
    }
    if (constraints.nuclear_ball) {
        const double alpha = *constraints.nuclear_ball;
        if (!(alpha > 0.0) || !(alpha < static_cast<double>(n))) {
            throw std::invalid_argument("nuclear ball radius must satisfy 0 < alpha < n");
        }
    }
    if (constraints.io) {
        if (constraints.io->m1 + constraints.io->m2 != n) {
            throw std::invalid_argument("io structure blocks must partition the state dimension");
        }
        for (const GhIneq& iq : constraints.io->ineqs) {
            for (const auto& term : iq.terms) {
                const Index rmax = term.block == GhIneq::Term::Block::G ? constraints.io->m1
                                                                        : constraints.io->m2;
                if (term.row < 0 || term.row >= rmax || term.col < 0 ||
                    term.col >= constraints.io->m1) {
                    throw std::invalid_argument("io inequality indexes outside G/H blocks");
                }
            }
        }
    }
    for (const LinearIneq& iq : constraints.a_linear) {
        for (const auto& term : iq.terms) {
            if (term.row < 0 || term.row >= n || term.col < 0 || term.col >= n) {
                throw std::invalid_argument("a_linear term indexes outside A");
            }
        }
    }
    if (constraints.omega_mode == OmegaMode::Fixed && constraints.omega_fixed < 0) {
        throw std::invalid_argument("fixed omega must be nonnegative");
    }
    if (error_norm.kind == ErrorNorm::Kind::WeightedQ) {
        if (error_norm.q.rows() != spec.p) {
            throw std::invalid_argument("error norm weight Q must be p x p");
        }
        cholesky(error_norm.q);  // throws if not SPD
    }
}

ConicProgram build_amopul(const MopulProblem& problem, ProgramForm form) {
    problem.validate();
    const SystemSpec& spec = problem.spec;
    const Index n = spec.n, m = spec.m, p = spec.p, horizon = spec.horizon;
    const ConstraintSet& cs = problem.constraints;

    const bool f1_active = problem.objective.lambda1 > 0.0 && problem.objective.f1.has_value();
    const bool f2_active =
        problem.objective.lambda2 > 0.0 && problem.objective.f2_control_effort && horizon > 1;
    const bool omega_variable = cs.omega_mode == OmegaMode::Variable;

    VariableMap vm;
    vm.n = n;
    vm.m = m;
    vm.p = p;
    vm.horizon = horizon;
    vm.a_offset = 0;
    vm.u_offset = n * n;
    Index next = n * n + horizon * m;
    if (omega_variable) vm.omega_index = next++;
    vm.omega_fixed = cs.omega_fixed;
    vm.xi_offset = next;
    next += horizon;
    if (f1_active) vm.f1_epi = next++;
    if (f2_active) {
        vm.f2_epi_offset = next;
        next += horizon - 1;
    }
    if (cs.nuclear_ball) {
        vm.w_side = n;
        vm.w_offset = next;
        next += 2 * tri(n);
    }
    vm.num_vars = next;

    const auto a_var = [&](Index i, Index j) { return vm.a_offset + i * n + j; };
    const auto u_var = [&](Index t, Index i) { return vm.u_offset + t * m + i; };
    const auto w1_var = [&](Index i, Index j) { return vm.w_offset + upper_index(i, j, n); };
    const auto w2_var = [&](Index i, Index j) { return vm.w_offset + tri(n) + upper_index(i, j, n); };

    Builder b(vm.num_vars);

    // --- Zero cone (equality rows) ---
    const Index zero_begin = b.row;
    if (cs.stochastic_columns) {
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < n; ++i) b.coeff(a_var(i, j), 1.0);
            b.finish_row(1.0);
        }
    }
    if (cs.io) {
        const Index m1 = cs.io->m1;
        for (Index i = 0; i < n; ++i) {
            for (Index j = m1; j < n; ++j) {
                b.coeff(a_var(i, j), 1.0);
                b.finish_row(i == j ? 1.0 : 0.0);
            }
        }
    }
    if (cs.u_box) {
        for (Index i = 0; i < m; ++i) {
            if (cs.u_box->upper(i) - cs.u_box->lower(i) <= kDegenerateBound) {
                for (Index t = 0; t < horizon; ++t) {
                    b.coeff(u_var(t, i), 1.0);
                    b.finish_row(cs.u_box->upper(i));
                }
            }
        }
    }
    for (Index t = 0; t < static_cast<Index>(cs.u_balls.size()); ++t) {
        if (cs.u_balls[static_cast<size_t>(t)].radius <= kDegenerateBound) {
            for (Index i = 0; i < m; ++i) {
                b.coeff(u_var(t, i), 1.0);
                b.finish_row(cs.u_balls[static_cast<size_t>(t)].center(i));
            }
        }
    }
    b.block(ConeType::Zero, b.row - zero_begin);

    // --- Nonnegative cone (scalar inequality rows) ---
    const Index nonneg_begin = b.row;
    if (cs.a_box) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                b.coeff(a_var(i, j), 1.0);
                b.finish_row(cs.a_box->upper(i, j));
                b.coeff(a_var(i, j), -1.0);
                b.finish_row(-cs.a_box->lower(i, j));
            }
        }
    }
    if (cs.u_box) {
        for (Index t = 0; t < horizon; ++t) {
            for (Index i = 0; i < m; ++i) {
                if (cs.u_box->upper(i) - cs.u_box->lower(i) <= kDegenerateBound) continue;
                b.coeff(u_var(t, i), 1.0);
                b.finish_row(cs.u_box->upper(i));
                b.coeff(u_var(t, i), -1.0);
                b.finish_row(-cs.u_box->lower(i));
            }
        }
    }
    if (cs.u_rate) {
        for (Index t = 1; t < horizon; ++t) {
            for (Index i = 0; i < m; ++i) {
                b.coeff(u_var(t, i), 1.0);
                b.coeff(u_var(t - 1, i), -1.0);
                b.finish_row(cs.u_rate->second(i));
                b.coeff(u_var(t, i), -1.0);
                b.coeff(u_var(t - 1, i), 1.0);
                b.finish_row(-cs.u_rate->first(i));
            }
        }
    }
    for (const LinearIneq& iq : cs.a_linear) {
        for (const auto& term : iq.terms) b.coeff(a_var(term.row, term.col), term.coeff);
        b.finish_row(iq.rhs);
    }
    if (cs.io) {
        const Index m1 = cs.io->m1;
        for (const GhIneq& iq : cs.io->ineqs) {
            double rhs = iq.rhs;
            for (const auto& term : iq.terms) {
                if (term.block == GhIneq::Term::Block::G) {
                    // G_ij = delta_ij - A_ij
                    b.coeff(a_var(term.row, term.col), -term.coeff);
                    if (term.row == term.col) rhs -= term.coeff;
                } else {
                    // H_ij = -A_{m1+i, j}
                    b.coeff(a_var(m1 + term.row, term.col), -term.coeff);
                }
            }
            b.finish_row(rhs);
        }
    }
    if (cs.stochastic_columns) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                b.coeff(a_var(i, j), -1.0);
                b.finish_row(0.0);
            }
        }
    }
    if (cs.nuclear_ball) {
        for (Index i = 0; i < n; ++i) {
            b.coeff(w1_var(i, i), 0.5);
            b.coeff(w2_var(i, i), 0.5);
        }
        b.finish_row(*cs.nuclear_ball);
    }
    if (omega_variable) {
        for (Index t = 0; t < horizon; ++t) b.coeff(vm.xi_offset + t, 1.0);
        b.coeff(vm.omega_index, -1.0);
        b.finish_row(0.0);
        b.coeff(vm.omega_index, 1.0);
        b.finish_row(cs.omega_upper);
        b.coeff(vm.omega_index, -1.0);
        b.finish_row(0.0);
    } else {
        for (Index t = 0; t < horizon; ++t) b.coeff(vm.xi_offset + t, 1.0);
        b.finish_row(cs.omega_fixed);
    }
    b.block(ConeType::Nonneg, b.row - nonneg_begin);

    // --- Stage error blocks ---
    // residual_t = C A C^+ r_{t-1} + C B u_{t-1} - r_t, optionally scaled by
    // L^T from Q = L L^T for the weighted norm.
    const Matrix c_pinv = pinv(spec.c);
    const Matrix cb = spec.c * spec.b;
    Matrix lt;  // Cholesky transpose for WeightedQ
    const bool weighted = problem.error_norm.kind == ErrorNorm::Kind::WeightedQ;
    if (weighted) lt = cholesky(problem.error_norm.q).transpose();

    for (Index t = 1; t <= horizon; ++t) {
        const Vector d = c_pinv * spec.reference_or_r0(t - 1);  // C^+ r_{t-1}
        // residual row i: sum_kl C_ik d_l A_kl + sum_j (CB)_ij u_{t-1,j} - r_t,i
        Matrix wa(p, n * n);
        for (Index i = 0; i < p; ++i) {
            for (Index k = 0; k < n; ++k) {
                for (Index l = 0; l < n; ++l) wa(i, k * n + l) = spec.c(i, k) * d(l);
            }
        }
        Matrix wu = cb;
        Vector rr = spec.reference(t);
        if (weighted) {
            wa = lt * wa;
            wu = lt * wu;
            rr = lt * rr;
        }
        if (form == ProgramForm::Soc) {
            b.coeff(vm.xi_offset + (t - 1), -1.0);
            b.finish_row(0.0);
            for (Index i = 0; i < p; ++i) {
                for (Index k = 0; k < n * n; ++k) b.coeff(vm.a_offset + k, -wa(i, k));
                for (Index j = 0; j < m; ++j) b.coeff(u_var(t - 1, j), -wu(i, j));
                b.finish_row(-rr(i));
            }
            b.block(ConeType::SecondOrder, p + 1);
        } else {
            // Arrow matrix [[xi I, v], [v^T, xi]] of side p+1 in svec packing.
            const Index begin = b.row;
            for (Index i = 0; i < p + 1; ++i) {
                for (Index j = i; j < p + 1; ++j) {
                    if (i == j) {
                        b.coeff(vm.xi_offset + (t - 1), -1.0);
                        b.finish_row(0.0);
                    } else if (j == p) {
                        for (Index k = 0; k < n * n; ++k) {
                            b.coeff(vm.a_offset + k, -kSqrt2 * wa(i, k));
                        }
                        for (Index jj = 0; jj < m; ++jj) {
                            b.coeff(u_var(t - 1, jj), -kSqrt2 * wu(i, jj));
                        }
                        b.finish_row(-kSqrt2 * rr(i));
                    } else {
                        b.finish_row(0.0);
                    }
                }
            }
            b.block(ConeType::Psd, b.row - begin, p + 1);
        }
    }

    // --- Objective epigraphs ---
    if (f1_active) {
        const Matrix& a_ref = problem.objective.f1->a_ref;
        b.coeff(vm.f1_epi, -1.0);
        b.finish_row(0.0);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                b.coeff(a_var(i, j), -1.0);
                b.finish_row(-a_ref(i, j));
            }
        }
        b.block(ConeType::SecondOrder, n * n + 1);
    }
    if (f2_active) {
        for (Index t = 1; t < horizon; ++t) {
            b.coeff(vm.f2_epi_offset + (t - 1), -1.0);
            b.finish_row(0.0);
            for (Index i = 0; i < m; ++i) {
                b.coeff(u_var(t, i), -1.0);
                b.coeff(u_var(t - 1, i), 1.0);
                b.finish_row(0.0);
            }
            b.block(ConeType::SecondOrder, m + 1);
        }
    }
    for (Index t = 0; t < static_cast<Index>(cs.u_balls.size()); ++t) {
        const UBall& ball = cs.u_balls[static_cast<size_t>(t)];
        if (ball.radius <= kDegenerateBound) continue;
        b.finish_row(ball.radius);
        for (Index i = 0; i < m; ++i) {
            b.coeff(u_var(t, i), 1.0);
            b.finish_row(ball.center(i));
        }
        b.block(ConeType::SecondOrder, m + 1);
    }

    // --- Nuclear norm PSD block [[W1, A], [A^T, W2]] ---
    if (cs.nuclear_ball) {
        const Index begin = b.row;
        const Index side = 2 * n;
        for (Index i = 0; i < side; ++i) {
            for (Index j = i; j < side; ++j) {
                const double scale = (i == j) ? 1.0 : kSqrt2;
                if (i < n && j < n) {
                    b.coeff(w1_var(i, j), -scale);
                } else if (i < n) {
                    b.coeff(a_var(i, j - n), -scale);
                } else {
                    b.coeff(w2_var(i - n, j - n), -scale);
                }
                b.finish_row(0.0);
            }
        }
        b.block(ConeType::Psd, b.row - begin, side);
    }

    ConicProgram prog;
    prog.num_vars = vm.num_vars;
    prog.vars = vm;
    prog.objective_coeffs = Vector::Zero(vm.num_vars);
    if (f1_active) prog.objective_coeffs(vm.f1_epi) = problem.objective.lambda1;
    if (f2_active) {
        for (Index t = 0; t < horizon - 1; ++t) {
            prog.objective_coeffs(vm.f2_epi_offset + t) = problem.objective.lambda2;
        }
    }
    if (problem.objective.lambda3 > 0.0 && problem.objective.f3_identity && omega_variable) {
        prog.objective_coeffs(vm.omega_index) = problem.objective.lambda3;
    }

    Eigen::SparseMatrix<double> g(b.row, vm.num_vars);
    g.setFromTriplets(b.trips.begin(), b.trips.end());
    prog.constraint_matrix = Matrix(g);
    prog.offsets = Eigen::Map<const Vector>(b.offsets.data(), static_cast<Index>(b.offsets.size()));
    prog.cone_blocks = std::move(b.blocks);
    return prog;
}

ExtractedSolution extract_solution(const ConicProgram& program, const Vector& x) {
    if (x.size() != program.num_vars) {
        std::ostringstream os;
        os << "assignment has " << x.size() << " entries, program has " << program.num_vars;
        throw std::invalid_argument(os.str());
    }
    const VariableMap& vm = program.vars;
    ExtractedSolution sol;
    sol.a = Matrix(vm.n, vm.n);
    for (Index i = 0; i < vm.n; ++i) {
        for (Index j = 0; j < vm.n; ++j) sol.a(i, j) = x(vm.a_offset + i * vm.n + j);
    }
    sol.controls.reserve(static_cast<size_t>(vm.horizon));
    for (Index t = 0; t < vm.horizon; ++t) {
        sol.controls.push_back(x.segment(vm.u_offset + t * vm.m, vm.m));
    }
    sol.omega = vm.omega_index >= 0 ? x(vm.omega_index) : vm.omega_fixed;
    sol.xi = x.segment(vm.xi_offset, vm.horizon);
    return sol;
}

std::vector<ConstraintMargin> check_constraints(const MopulProblem& problem, const Matrix& a,
                                                const std::vector<Vector>& controls,
                                                double omega) {
    const SystemSpec& spec = problem.spec;
    const ConstraintSet& cs = problem.constraints;
    std::vector<ConstraintMargin> out;
    auto add = [&](std::string name, double margin) {
        out.push_back(ConstraintMargin{std::move(name), margin});
    };

    const Trajectory approx = rollout_approx(spec, a, controls);
    double ace = cumulative_error(approx, spec, problem.error_norm);
    const double omega_eff = cs.omega_mode == OmegaMode::Fixed ? cs.omega_fixed : omega;
    add("approx_cumulative_error <= omega", omega_eff - ace);
    if (cs.omega_mode == OmegaMode::Variable) {
        add("omega >= 0", omega);
        add("omega <= omega_upper", cs.omega_upper - omega);
    }

    if (cs.a_box) {
        add("a_box lower", (a - cs.a_box->lower).minCoeff());
        add("a_box upper", (cs.a_box->upper - a).minCoeff());
    }
    if (cs.u_box) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = lo;
        for (const Vector& u : controls) {
            lo = std::min(lo, (u - cs.u_box->lower).minCoeff());
            hi = std::min(hi, (cs.u_box->upper - u).minCoeff());
        }
        add("u_box lower", lo);
        add("u_box upper", hi);
    }
    if (cs.u_rate) {
        double worst = std::numeric_limits<double>::infinity();
        for (size_t t = 1; t < controls.size(); ++t) {
            const Vector d = controls[t] - controls[t - 1];
            worst = std::min(worst, (d - cs.u_rate->first).minCoeff());
            worst = std::min(worst, (cs.u_rate->second - d).minCoeff());
        }
        add("u_rate", worst);
    }
    for (size_t t = 0; t < cs.u_balls.size(); ++t) {
        const UBall& ball = cs.u_balls[t];
        add("u_ball[" + std::to_string(t) + "]", ball.radius - (controls[t] - ball.center).norm());
    }
    for (size_t k = 0; k < cs.a_linear.size(); ++k) {
        const LinearIneq& iq = cs.a_linear[k];
        double lhs = 0.0;
        for (const auto& term : iq.terms) lhs += term.coeff * a(term.row, term.col);
        add(iq.label.empty() ? "a_linear[" + std::to_string(k) + "]" : iq.label, iq.rhs - lhs);
    }
    if (cs.stochastic_columns) {
        add("A entrywise nonneg", a.minCoeff());
        double worst = 0.0;
        for (Index j = 0; j < spec.n; ++j) {
            worst = std::max(worst, std::abs(a.col(j).sum() - 1.0));
        }
        add("columns sum to 1", -worst);
    }
    if (cs.nuclear_ball) {
        add("nuclear norm <= alpha", *cs.nuclear_ball - nuclear_norm(a));
    }
    if (cs.io) {
        const Index m1 = cs.io->m1;
        double worst = 0.0;
        for (Index i = 0; i < spec.n; ++i) {
            for (Index j = m1; j < spec.n; ++j) {
                worst = std::max(worst, std::abs(a(i, j) - (i == j ? 1.0 : 0.0)));
            }
        }
        add("io block pattern", -worst);
        for (size_t k = 0; k < cs.io->ineqs.size(); ++k) {
            const GhIneq& iq = cs.io->ineqs[k];
            double lhs = 0.0;
            for (const auto& term : iq.terms) {
                if (term.block == GhIneq::Term::Block::G) {
                    lhs += term.coeff * ((term.row == term.col ? 1.0 : 0.0) - a(term.row, term.col));
                } else {
                    lhs += term.coeff * (-a(m1 + term.row, term.col));
                }
            }
            add(iq.label.empty() ? "io_ineq[" + std::to_string(k) + "]" : iq.label, iq.rhs - lhs);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

MopulProblem preset_mpc(SystemSpec spec, double lambda, ConstraintSet extra) {
    if (lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
    MopulProblem prob;
    prob.spec = std::move(spec);
    prob.objective.lambda2 = lambda;
    prob.objective.f2_control_effort = lambda > 0.0;
    prob.objective.lambda3 = 1.0;
    prob.objective.f3_identity = true;
    prob.constraints = std::move(extra);
    prob.constraints.omega_mode = OmegaMode::Variable;
    prob.validate();
    return prob;
}

MopulProblem preset_covid(SystemSpec spec, ConstraintSet extra) {
    if (spec.n != 4 || spec.m != 4 || spec.p != 4) {
        throw std::invalid_argument("covid preset requires n = m = p = 4");
    }
    SystemSpec enforced(Matrix::Identity(4, 4), Matrix::Identity(4, 4), spec.x0, spec.references);
    MopulProblem prob;
    prob.spec = std::move(enforced);
    prob.objective.lambda3 = 1.0;
    prob.objective.f3_identity = true;
    prob.constraints = std::move(extra);
    prob.constraints.omega_mode = OmegaMode::Variable;
    prob.validate();
    return prob;
}

MopulProblem preset_markov(Index num_states, double alpha,
                           const std::vector<Vector>& observations,
                           std::vector<LinearIneq> extra_ineqs) {
    if (observations.size() < 2) {
        throw std::invalid_argument("markov preset needs an initial distribution plus references");
    }
    for (const Vector& obs : observations) {
        if (obs.size() != num_states) {
            throw std::invalid_argument("observation dimension does not match state count");
        }
        if (obs.minCoeff() < -1e-9 || std::abs(obs.sum() - 1.0) > 1e-6) {
            throw std::invalid_argument("observation is not a probability distribution");
        }
    }
    std::vector<Vector> refs(observations.begin() + 1, observations.end());
    SystemSpec spec(Matrix::Zero(num_states, num_states), Matrix::Identity(num_states, num_states),
                    observations.front(), std::move(refs));
    MopulProblem prob;
    prob.spec = std::move(spec);
    prob.objective.lambda3 = 1.0;
    prob.objective.f3_identity = true;
    prob.constraints.stochastic_columns = true;
    prob.constraints.nuclear_ball = alpha;
    prob.constraints.a_linear = std::move(extra_ineqs);
    prob.constraints.u_box = ControlBox{Vector::Zero(num_states), Vector::Zero(num_states)};
    prob.validate();
    return prob;
}

namespace {
MopulProblem make_io_base(Index m1, Index m2, Vector x0, std::vector<Vector> refs,
                          std::vector<GhIneq> io_ineqs) {
    const Index n = m1 + m2;
    SystemSpec spec(Matrix::Identity(n, n), Matrix::Identity(n, n), std::move(x0), std::move(refs));
    MopulProblem prob;
    prob.spec = std::move(spec);
    prob.constraints.io = IoStructure{m1, m2, std::move(io_ineqs)};
    return prob;
}
}  // namespace

MopulProblem preset_io1(Index m1, Index m2, Vector x0, std::vector<Vector> refs,
                        std::vector<GhIneq> io_ineqs) {
    MopulProblem prob = make_io_base(m1, m2, std::move(x0), std::move(refs), std::move(io_ineqs));
    prob.objective.lambda3 = 1.0;
    prob.objective.f3_identity = true;
    prob.validate();
    return prob;
}

MopulProblem preset_io2(Index m1, Index m2, Vector x0, std::vector<Vector> refs, Matrix a_ref,
                        std::vector<Vector> u_refs, double omega, std::vector<double> omega_t,
                        std::vector<GhIneq> io_ineqs) {
    MopulProblem prob = make_io_base(m1, m2, std::move(x0), std::move(refs), std::move(io_ineqs));
    prob.objective.lambda1 = 1.0;
    prob.objective.f1 = FrobeniusDistance{std::move(a_ref)};
    prob.constraints.omega_mode = OmegaMode::Fixed;
    prob.constraints.omega_fixed = omega;
    if (u_refs.size() != omega_t.size() ||
        static_cast<Index>(u_refs.size()) != prob.spec.horizon) {
        throw std::invalid_argument("io2 needs one control reference and radius per stage");
    }
    for (size_t t = 0; t < u_refs.size(); ++t) {
        prob.constraints.u_balls.push_back(UBall{u_refs[t], omega_t[t]});
    }
    prob.validate();
    return prob;
}

MopulProblem preset_amopul1_box(SystemSpec spec, double a_bound, double u_bound) {
    if (a_bound < 0 || u_bound < 0) throw std::invalid_argument("box bounds must be nonnegative");
    MopulProblem prob;
    const Index n = spec.n, m = spec.m;
    prob.spec = std::move(spec);
    prob.objective.lambda3 = 1.0;
    prob.objective.f3_identity = true;
    prob.constraints.a_box =
        BoxBounds{Matrix::Constant(n, n, -a_bound), Matrix::Constant(n, n, a_bound)};
    prob.constraints.u_box = ControlBox{Vector::Constant(m, -u_bound), Vector::Constant(m, u_bound)};
    prob.validate();
    return prob;
}

MopulProblem preset_amopul2(SystemSpec spec, Matrix a_ref, std::vector<Vector> u_refs,
                            double omega_tilde, std::vector<double> omega_t) {
    MopulProblem prob;
    prob.spec = std::move(spec);
    prob.objective.lambda1 = 1.0;
    prob.objective.f1 = FrobeniusDistance{std::move(a_ref)};
    prob.constraints.omega_mode = OmegaMode::Fixed;
    prob.constraints.omega_fixed = omega_tilde;
    if (omega_t.size() == 1) omega_t.assign(static_cast<size_t>(prob.spec.horizon), omega_t[0]);
    if (u_refs.size() != omega_t.size() ||
        static_cast<Index>(u_refs.size()) != prob.spec.horizon) {
        throw std::invalid_argument("amopul2 needs one control reference and radius per stage");
    }
    for (size_t t = 0; t < u_refs.size(); ++t) {
        prob.constraints.u_balls.push_back(UBall{u_refs[t], omega_t[t]});
    }
    prob.validate();
    return prob;
}

}  // namespace mopul
