#include "mopul/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mopul {

namespace {

void expect_schema(const Json& j, const std::string& schema) {
    if (!j.is_object() || j.value("schema", "") != schema) {
        throw std::invalid_argument("expected schema " + schema);
    }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a row array");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Json& row = j.at(static_cast<size_t>(i));
        if (static_cast<Index>(row.size()) != cols) {
            throw std::invalid_argument("ragged matrix rows");
        }
        for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<size_t>(c)).get<double>();
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<size_t>(i)).get<double>();
    return v;
}

Json problem_to_json(const MopulProblem& problem) {
    Json j;
    j["schema"] = "mopul-problem-v1";

    Json sys;
    sys["b"] = matrix_to_json(problem.spec.b);
    sys["c"] = matrix_to_json(problem.spec.c);
    sys["x0"] = vector_to_json(problem.spec.x0);
    Json refs = Json::array();
    for (const Vector& r : problem.spec.references) refs.push_back(vector_to_json(r));
    sys["references"] = std::move(refs);
    j["system"] = std::move(sys);

    Json obj;
    obj["lambda1"] = problem.objective.lambda1;
    obj["lambda2"] = problem.objective.lambda2;
    obj["lambda3"] = problem.objective.lambda3;
    if (problem.objective.f1) obj["f1_a_ref"] = matrix_to_json(problem.objective.f1->a_ref);
    obj["f2_control_effort"] = problem.objective.f2_control_effort;
    obj["f3_identity"] = problem.objective.f3_identity;
    j["objective"] = std::move(obj);

    Json cons;
    const ConstraintSet& cs = problem.constraints;
    if (cs.a_box) {
        cons["a_box"] = {{"lower", matrix_to_json(cs.a_box->lower)},
                         {"upper", matrix_to_json(cs.a_box->upper)}};
    }
    if (cs.u_box) {
        cons["u_box"] = {{"lower", vector_to_json(cs.u_box->lower)},
                         {"upper", vector_to_json(cs.u_box->upper)}};
    }
    if (cs.u_rate) {
        cons["u_rate"] = {{"lower", vector_to_json(cs.u_rate->first)},
                          {"upper", vector_to_json(cs.u_rate->second)}};
    }
    if (!cs.u_balls.empty()) {
        Json balls = Json::array();
        for (const UBall& ball : cs.u_balls) {
            balls.push_back({{"center", vector_to_json(ball.center)}, {"radius", ball.radius}});
        }
        cons["u_balls"] = std::move(balls);
    }
    cons["omega_mode"] = cs.omega_mode == OmegaMode::Variable ? "variable" : "fixed";
    if (cs.omega_mode == OmegaMode::Fixed) cons["omega_fixed"] = cs.omega_fixed;
    cons["omega_upper"] = cs.omega_upper;
    if (!cs.a_linear.empty()) {
        Json ineqs = Json::array();
        for (const LinearIneq& ineq : cs.a_linear) {
            Json terms = Json::array();
            for (const LinearIneq::Term& t : ineq.terms) {
                terms.push_back({{"row", t.row}, {"col", t.col}, {"coeff", t.coeff}});
            }
            ineqs.push_back(
                {{"terms", std::move(terms)}, {"rhs", ineq.rhs}, {"label", ineq.label}});
        }
        cons["a_linear"] = std::move(ineqs);
    }
    if (cs.stochastic_columns) cons["stochastic_columns"] = true;
    if (cs.nuclear_ball) cons["nuclear_ball"] = *cs.nuclear_ball;
    if (cs.io) {
        Json ineqs = Json::array();
        for (const GhIneq& ineq : cs.io->ineqs) {
            Json terms = Json::array();
            for (const GhIneq::Term& t : ineq.terms) {
                terms.push_back({{"block", t.block == GhIneq::Term::Block::G ? "G" : "H"},
                                 {"row", t.row},
                                 {"col", t.col},
                                 {"coeff", t.coeff}});
            }
            ineqs.push_back(
                {{"terms", std::move(terms)}, {"rhs", ineq.rhs}, {"label", ineq.label}});
        }
        cons["io"] = {{"m1", cs.io->m1}, {"m2", cs.io->m2}, {"ineqs", std::move(ineqs)}};
    }
    j["constraints"] = std::move(cons);

    if (problem.error_norm.kind == ErrorNorm::Kind::Euclidean) {
        j["error_norm"] = {{"kind", "euclidean"}};
    } else {
        j["error_norm"] = {{"kind", "weighted"}, {"q", matrix_to_json(problem.error_norm.q)}};
    }
    return j;
}

MopulProblem problem_from_json(const Json& j) {
    expect_schema(j, "mopul-problem-v1");
    const Json& sys = j.at("system");
    std::vector<Vector> refs;
    for (const Json& r : sys.at("references")) refs.push_back(vector_from_json(r));

    MopulProblem problem;
    problem.spec = SystemSpec(matrix_from_json(sys.at("b")), matrix_from_json(sys.at("c")),
                              vector_from_json(sys.at("x0")), std::move(refs));

    const Json& obj = j.at("objective");
    problem.objective.lambda1 = obj.value("lambda1", 0.0);
    problem.objective.lambda2 = obj.value("lambda2", 0.0);
    problem.objective.lambda3 = obj.value("lambda3", 0.0);
    if (obj.contains("f1_a_ref")) {
        problem.objective.f1 = FrobeniusDistance{matrix_from_json(obj.at("f1_a_ref"))};
    }
    problem.objective.f2_control_effort = obj.value("f2_control_effort", false);
    problem.objective.f3_identity = obj.value("f3_identity", false);

    const Json& cons = j.at("constraints");
    ConstraintSet& cs = problem.constraints;
    if (cons.contains("a_box")) {
        cs.a_box = BoxBounds{matrix_from_json(cons.at("a_box").at("lower")),
                             matrix_from_json(cons.at("a_box").at("upper"))};
    }
    if (cons.contains("u_box")) {
        cs.u_box = ControlBox{vector_from_json(cons.at("u_box").at("lower")),
                              vector_from_json(cons.at("u_box").at("upper"))};
    }
    if (cons.contains("u_rate")) {
        cs.u_rate = std::make_pair(vector_from_json(cons.at("u_rate").at("lower")),
                                   vector_from_json(cons.at("u_rate").at("upper")));
    }
    if (cons.contains("u_balls")) {
        for (const Json& ball : cons.at("u_balls")) {
            cs.u_balls.push_back(
                UBall{vector_from_json(ball.at("center")), ball.at("radius").get<double>()});
        }
    }
    cs.omega_mode =
        cons.value("omega_mode", "variable") == "fixed" ? OmegaMode::Fixed : OmegaMode::Variable;
    cs.omega_fixed = cons.value("omega_fixed", 0.0);
    cs.omega_upper = cons.value("omega_upper", 1e4);
    if (cons.contains("a_linear")) {
        for (const Json& ineq : cons.at("a_linear")) {
            LinearIneq li;
            for (const Json& t : ineq.at("terms")) {
                li.terms.push_back({t.at("row").get<Index>(), t.at("col").get<Index>(),
                                    t.at("coeff").get<double>()});
            }
            li.rhs = ineq.at("rhs").get<double>();
            li.label = ineq.value("label", "");
            cs.a_linear.push_back(std::move(li));
        }
    }
    cs.stochastic_columns = cons.value("stochastic_columns", false);
    if (cons.contains("nuclear_ball")) cs.nuclear_ball = cons.at("nuclear_ball").get<double>();
    if (cons.contains("io")) {
        IoStructure io;
        io.m1 = cons.at("io").at("m1").get<Index>();
        io.m2 = cons.at("io").at("m2").get<Index>();
        for (const Json& ineq : cons.at("io").at("ineqs")) {
            GhIneq gi;
            for (const Json& t : ineq.at("terms")) {
                gi.terms.push_back({t.at("block").get<std::string>() == "G"
                                        ? GhIneq::Term::Block::G
                                        : GhIneq::Term::Block::H,
                                    t.at("row").get<Index>(), t.at("col").get<Index>(),
                                    t.at("coeff").get<double>()});
            }
            gi.rhs = ineq.at("rhs").get<double>();
            gi.label = ineq.value("label", "");
            io.ineqs.push_back(std::move(gi));
        }
        cs.io = std::move(io);
    }

    if (j.contains("error_norm") && j.at("error_norm").value("kind", "euclidean") == "weighted") {
        problem.error_norm = ErrorNorm::weighted(matrix_from_json(j.at("error_norm").at("q")));
    }
    problem.validate();
    return problem;
}

Json solution_to_json(const Solution& solution, const ExtractedSolution& extracted) {
    Json j;
    j["schema"] = "mopul-solution-v1";
    j["status"] = to_string(solution.status);
    j["objective"] = solution.objective;
    j["iterations"] = solution.iterations;
    j["residuals"] = {{"primal", solution.residuals.primal},
                      {"dual", solution.residuals.dual},
                      {"gap", solution.residuals.gap}};
    j["a"] = matrix_to_json(extracted.a);
    Json controls = Json::array();
    for (const Vector& u : extracted.controls) controls.push_back(vector_to_json(u));
    j["controls"] = std::move(controls);
    j["omega"] = extracted.omega;
    j["xi"] = vector_to_json(extracted.xi);
    if (solution.has_certificate) j["has_certificate"] = true;
    if (!solution.failure_detail.empty()) j["failure_detail"] = solution.failure_detail;
    return j;
}

LoadedSolution solution_from_json(const Json& j) {
    expect_schema(j, "mopul-solution-v1");
    LoadedSolution loaded;
    loaded.status = j.at("status").get<std::string>();
    loaded.objective = j.at("objective").get<double>();
    loaded.extracted.a = matrix_from_json(j.at("a"));
    for (const Json& u : j.at("controls")) loaded.extracted.controls.push_back(vector_from_json(u));
    loaded.extracted.omega = j.at("omega").get<double>();
    loaded.extracted.xi = vector_from_json(j.at("xi"));
    return loaded;
}

Json certificate_to_json(const BoundCertificate& cert) {
    Json j;
    j["schema"] = "mopul-certificate-v1";
    j["tag"] = cert.tag;
    Json inputs;
    for (const auto& [k, v] : cert.inputs) inputs[k] = v;
    j["inputs"] = std::move(inputs);
    j["bound_value"] = cert.bound_value;
    j["observed_value"] = cert.observed_value;
    j["holds"] = cert.holds;
    j["slack"] = cert.slack;
    j["preconditions_ok"] = cert.preconditions_ok;
    j["evaluated"] = cert.evaluated;
    if (!cert.note.empty()) j["note"] = cert.note;
    return j;
}

Json manifest_to_json(const RunManifest& manifest) {
    Json j;
    j["schema"] = "mopul-manifest-v1";
    j["command"] = manifest.command;
    Json config;
    for (const auto& [k, v] : manifest.config) config[k] = v;
    j["config"] = std::move(config);
    j["seed"] = manifest.seed;
    j["artifacts"] = manifest.artifacts;
    j["tool_version"] = manifest.tool_version;
    j["wall_time_seconds"] = manifest.wall_time_seconds;
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace mopul
