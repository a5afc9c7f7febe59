#pragma once

// Shared library of cone programs with closed-form optimal values, used by
// the solver unit tests and the acceptance run.

#include <cmath>
#include <string>
#include <vector>

#include "mopul/model.hpp"

namespace mopul::testing {

struct Analytic {
    std::string name;
    ConicProgram program;
    double optimum;
};

// Small library of programs with closed-form optimal values.
std::vector<Analytic> analytic_library() {
    std::vector<Analytic> lib;

    {
        ConicProgram p;  // min x s.t. x >= 1
        p.num_vars = 1;
        p.objective_coeffs = Vector::Ones(1);
        p.constraint_matrix = Matrix::Constant(1, 1, -1.0);
        p.offsets = Vector::Constant(1, -1.0);
        p.cone_blocks = {{ConeType::Nonneg, 1, 0}};
        lib.push_back({"lp_lower_bound", p, 1.0});
    }
    {
        ConicProgram p;  // min -x-2y s.t. 0 <= x,y <= 1
        p.num_vars = 2;
        p.objective_coeffs = Vector(2);
        p.objective_coeffs << -1.0, -2.0;
        p.constraint_matrix = Matrix::Zero(4, 2);
        p.constraint_matrix << 1, 0, 0, 1, -1, 0, 0, -1;
        p.offsets = Vector::Zero(4);
        p.offsets(0) = 1.0;
        p.offsets(1) = 1.0;
        p.cone_blocks = {{ConeType::Nonneg, 4, 0}};
        lib.push_back({"lp_box", p, -3.0});
    }
    {
        ConicProgram p;  // min x+y s.t. x+y = 1, x,y >= 0
        p.num_vars = 2;
        p.objective_coeffs = Vector::Ones(2);
        p.constraint_matrix = Matrix::Zero(3, 2);
        p.constraint_matrix.row(0) << 1, 1;
        p.constraint_matrix.row(1) << -1, 0;
        p.constraint_matrix.row(2) << 0, -1;
        p.offsets = Vector::Zero(3);
        p.offsets(0) = 1.0;
        p.cone_blocks = {{ConeType::Zero, 1, 0}, {ConeType::Nonneg, 2, 0}};
        lib.push_back({"lp_simplex", p, 1.0});
    }
    {
        ConicProgram p;  // min -x1-x2 over the unit disk
        p.num_vars = 2;
        p.objective_coeffs = -Vector::Ones(2);
        p.constraint_matrix = Matrix::Zero(3, 2);
        p.constraint_matrix(1, 0) = -1.0;
        p.constraint_matrix(2, 1) = -1.0;
        p.offsets = Vector::Zero(3);
        p.offsets(0) = 1.0;
        p.cone_blocks = {{ConeType::SecondOrder, 3, 0}};
        lib.push_back({"soc_disk", p, -std::sqrt(2.0)});
    }
    {
        // min c.x over a ball of radius r centered at b: optimum c.b - r*||c||.
        ConicProgram p;
        Vector c(3), b(3);
        c << 1.0, -2.0, 0.5;
        b << 0.3, 0.1, -0.4;
        const double r = 1.7;
        p.num_vars = 3;
        p.objective_coeffs = c;
        p.constraint_matrix = Matrix::Zero(4, 3);
        p.constraint_matrix.bottomRows(3) = -Matrix::Identity(3, 3);
        p.offsets = Vector(4);
        p.offsets << r, -b(0), -b(1), -b(2);
        p.cone_blocks = {{ConeType::SecondOrder, 4, 0}};
        lib.push_back({"soc_ball", p, c.dot(b) - r * c.norm()});
    }
    {
        // Epigraph of a fixed norm: min t s.t. ||(1,2)|| <= t.
        ConicProgram p;
        p.num_vars = 1;
        p.objective_coeffs = Vector::Ones(1);
        p.constraint_matrix = Matrix::Zero(3, 1);
        p.constraint_matrix(0, 0) = -1.0;
        p.offsets = Vector(3);
        p.offsets << 0.0, 1.0, 2.0;
        p.cone_blocks = {{ConeType::SecondOrder, 3, 0}};
        lib.push_back({"soc_epigraph", p, std::sqrt(5.0)});
    }
    {
        ConicProgram p;  // min tr X s.t. X >= diag(2,3)
        p.num_vars = 3;
        p.objective_coeffs = svec(Matrix::Identity(2, 2));
        p.constraint_matrix = -Matrix::Identity(3, 3);
        Matrix d(2, 2);
        d << 2, 0, 0, 3;
        p.offsets = -svec(d);
        p.cone_blocks = {{ConeType::Psd, 3, 2}};
        lib.push_back({"sdp_dominate_psd", p, 5.0});
    }
    {
        ConicProgram p;  // same with an indefinite floor: optimum tr D = 1
        p.num_vars = 3;
        p.objective_coeffs = svec(Matrix::Identity(2, 2));
        p.constraint_matrix = -Matrix::Identity(3, 3);
        Matrix d(2, 2);
        d << -1, 0.5, 0.5, 2;
        p.offsets = -svec(d);
        p.cone_blocks = {{ConeType::Psd, 3, 2}};
        lib.push_back({"sdp_dominate_indefinite", p, 1.0});
    }
    {
        // Largest eigenvalue: min t s.t. t I - M >= 0, with spectrum {1, 2, 5}.
        Matrix q(3, 3);
        q << 2, -1, 0, 1, 1, 1, 0, 1, -1;
        Eigen::HouseholderQR<Matrix> qr(q);
        const Matrix u = qr.householderQ();
        Matrix lam = Matrix::Zero(3, 3);
        lam.diagonal() << 1.0, 2.0, 5.0;
        const Matrix m = u * lam * u.transpose();
        ConicProgram p;
        p.num_vars = 1;
        p.objective_coeffs = Vector::Ones(1);
        p.constraint_matrix = Matrix::Zero(6, 1);
        p.constraint_matrix.col(0) = -svec(Matrix::Identity(3, 3));
        p.offsets = -svec(m);
        p.cone_blocks = {{ConeType::Psd, 6, 3}};
        lib.push_back({"sdp_lambda_max", p, 5.0});
    }
    {
        // Mixed cones: min x s.t. x >= ||(1,1)||, x <= 10.
        ConicProgram p;
        p.num_vars = 1;
        p.objective_coeffs = Vector::Ones(1);
        p.constraint_matrix = Matrix::Zero(4, 1);
        p.constraint_matrix(0, 0) = -1.0;
        p.constraint_matrix(3, 0) = 1.0;
        p.offsets = Vector(4);
        p.offsets << 0.0, 1.0, 1.0, 10.0;
        p.cone_blocks = {{ConeType::SecondOrder, 3, 0}, {ConeType::Nonneg, 1, 0}};
        lib.push_back({"mixed_soc_lp", p, std::sqrt(2.0)});
    }
    {
        // Equality ties an LP variable to a disk variable:
        // min y s.t. y = x1, ||(x1, x2)|| <= 1  -> optimum -1.
        ConicProgram p;
        p.num_vars = 3;  // y, x1, x2
        p.objective_coeffs = Vector::Zero(3);
        p.objective_coeffs(0) = 1.0;
        p.constraint_matrix = Matrix::Zero(4, 3);
        p.constraint_matrix.row(0) << 1, -1, 0;
        p.constraint_matrix(2, 1) = -1.0;
        p.constraint_matrix(3, 2) = -1.0;
        p.offsets = Vector::Zero(4);
        p.offsets(1) = 1.0;
        p.cone_blocks = {{ConeType::Zero, 1, 0}, {ConeType::SecondOrder, 3, 0}};
        lib.push_back({"eq_soc", p, -1.0});
    }

    return lib;
}

}  // namespace mopul::testing
