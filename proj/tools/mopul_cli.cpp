#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mopul/experiments.hpp"
#include "mopul/json_io.hpp"

namespace fs = std::filesystem;
using namespace mopul;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolverFailure = 4;
constexpr int kExitValidationFailure = 5;

struct ManifestWriter {
    RunManifest manifest;
    fs::path out_dir;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ManifestWriter(std::string command, fs::path out) : out_dir(std::move(out)) {
        manifest.command = std::move(command);
        manifest.tool_version = kVersion;
    }
    void add(const std::string& key, const std::string& value) {
        manifest.config.emplace_back(key, value);
    }
    void write_artifact(const std::string& name, const std::string& contents) {
        write_text_file(out_dir / name, contents);
        manifest.artifacts.push_back(name);
    }
    void finish() {
        manifest.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_text_file(out_dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
    }
};

std::string references_csv(const SystemSpec& spec) {
    std::ostringstream os;
    os << "t";
    for (Index i = 0; i < spec.p; ++i) os << ",r" << i;
    os << '\n';
    const Vector r0 = spec.r0();
    for (Index t = 0; t <= spec.horizon; ++t) {
        const Vector r = t == 0 ? r0 : spec.reference(t);
        os << t;
        for (Index i = 0; i < spec.p; ++i) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", r(i));
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

int cmd_generate(const std::string& preset, Index n, Index horizon, std::uint64_t seed,
                 double mu, double sigma, double a_bound, double u_bound, double omega_tilde,
                 double omega_t, const fs::path& out) {
    ManifestWriter mw("generate", out);
    mw.manifest.seed = seed;
    mw.add("preset", preset);
    mw.add("n", std::to_string(n));
    mw.add("horizon", std::to_string(horizon));
    mw.add("mu", std::to_string(mu));
    mw.add("sigma", std::to_string(sigma));

    IdealInstance inst = gen_ideal(n, horizon, seed);
    std::vector<Vector> refs =
        perturb_refs(inst, NoiseSpec{mu, sigma}, Rng(seed).derive("cli noise").next_u64());
    const SystemSpec spec = with_references(inst.spec, std::move(refs));

    MopulProblem problem;
    if (preset == "amopul1") {
        problem = preset_amopul1_box(spec, a_bound, u_bound);
        mw.add("a_bound", std::to_string(a_bound));
        mw.add("u_bound", std::to_string(u_bound));
    } else {
        problem = preset_amopul2(spec, inst.a_hat, inst.u_hat, omega_tilde, {omega_t});
        mw.add("omega_tilde", std::to_string(omega_tilde));
        mw.add("omega_t", std::to_string(omega_t));
    }

    mw.write_artifact("problem.json", problem_to_json(problem).dump(2) + "\n");
    mw.write_artifact("references.csv", references_csv(spec));
    mw.finish();
    std::cout << "wrote " << (out / "problem.json").string() << '\n';
    return kExitOk;
}

int cmd_solve(const fs::path& problem_path, const std::string& form_name, double tol,
              int max_iters, const fs::path& out) {
    ManifestWriter mw("solve", out);
    mw.add("problem", problem_path.string());
    mw.add("form", form_name);

    MopulProblem problem;
    try {
        problem = problem_from_json(Json::parse(read_text_file(problem_path)));
    } catch (const Json::parse_error& e) {
        std::cerr << "problem file is not valid JSON: " << e.what() << '\n';
        return kExitUsage;
    }

    const ProgramForm form = form_name == "lmi" ? ProgramForm::Lmi : ProgramForm::Soc;
    const ConicProgram program = build_amopul(problem, form);
    SolverConfig config;
    config.tol_primal = config.tol_dual = config.tol_gap = tol;
    config.max_iters = max_iters;
    const Solution sol = solve(program, config);

    ExtractedSolution extracted;
    if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::IterationLimit) {
        extracted = extract_solution(program, sol.x);
    } else {
        extracted.a = Matrix::Zero(problem.spec.n, problem.spec.n);
        extracted.controls.assign(static_cast<size_t>(problem.spec.horizon),
                                  Vector::Zero(problem.spec.m));
        extracted.xi = Vector::Zero(problem.spec.horizon);
    }
    mw.write_artifact("solution.json", solution_to_json(sol, extracted).dump(2) + "\n");

    std::ostringstream summary;
    summary << "status: " << to_string(sol.status) << "\nobjective: " << sol.objective
            << "\niterations: " << sol.iterations << "\nresiduals: primal "
            << sol.residuals.primal << ", dual " << sol.residuals.dual << ", gap "
            << sol.residuals.gap << '\n';
    if (sol.has_certificate) summary << "certificate: attached in solution.json\n";
    mw.write_artifact("summary.txt", summary.str());
    mw.finish();
    std::cout << summary.str();

    switch (sol.status) {
        case SolveStatus::Optimal: return kExitOk;
        case SolveStatus::PrimalInfeasible:
        case SolveStatus::DualInfeasible: return kExitInfeasible;
        default: return kExitSolverFailure;
    }
}

int cmd_bounds(const std::string& tag, const fs::path& problem_path,
               const fs::path& solution_path, std::optional<double> beta,
               std::optional<double> omega_u, std::optional<double> omega_c,
               std::optional<double> gamma, const std::vector<double>& eps,
               const fs::path& q_path, Index horizon_flag, const fs::path& out) {
    ManifestWriter mw("bounds", out);
    mw.add("theorem", tag);

    auto need = [&](const std::optional<double>& v, const char* name) {
        if (!v) {
            std::ostringstream os;
            os << "--theorem " << tag << " requires --" << name;
            throw CLI::ValidationError(os.str());
        }
        return *v;
    };

    if (tag == "t3") {
        const double level = theorem3_tighten(need(omega_c, "omega-c"), need(beta, "beta"),
                                              horizon_flag);
        std::cout << level << '\n';
        mw.write_artifact("level.txt", std::to_string(level) + "\n");
        mw.finish();
        return kExitOk;
    }
    if (tag == "t4") {
        if (eps.empty()) throw CLI::ValidationError("--theorem t4 requires --eps");
        const double bound = theorem4_bound(eps, gamma.value_or(0.0));
        std::cout << bound << '\n';
        mw.write_artifact("bound.txt", std::to_string(bound) + "\n");
        mw.finish();
        return kExitOk;
    }
    if (tag == "r3") {
        const Matrix q = matrix_from_json(Json::parse(read_text_file(q_path)));
        const double level =
            remark3_level(need(omega_c, "omega-c"), need(beta, "beta"), horizon_flag, q);
        std::cout << level << '\n';
        mw.write_artifact("level.txt", std::to_string(level) + "\n");
        mw.finish();
        return kExitOk;
    }

    // t2 and t7 need a solved problem/solution pair.
    const MopulProblem problem = problem_from_json(Json::parse(read_text_file(problem_path)));
    const LoadedSolution loaded = solution_from_json(Json::parse(read_text_file(solution_path)));

    double beta_value;
    if (beta) {
        beta_value = *beta;
    } else if (auto derived = beta_from_box(problem)) {
        beta_value = *derived;
    } else {
        throw CLI::ValidationError("no --beta given and the problem has no a_box to derive one");
    }

    BoundCertificate cert;
    if (tag == "t2") {
        const double omega_u_value =
            omega_u ? *omega_u
                    : cumulative_error(rollout_approx(problem.spec, loaded.extracted.a,
                                                      loaded.extracted.controls),
                                       problem.spec, problem.error_norm);
        cert = theorem2_certificate(problem.spec, loaded.extracted.a, loaded.extracted.controls,
                                    beta_value, omega_u_value, problem.error_norm);
    } else if (tag == "t7") {
        cert = theorem7_certificate(problem.spec, need(omega_c, "omega-c"), beta_value,
                                    loaded.extracted.a, loaded.extracted.controls,
                                    loaded.objective);
    } else {
        throw CLI::ValidationError("unknown theorem tag: " + tag);
    }

    mw.write_artifact("certificate.json", certificate_to_json(cert).dump(2) + "\n");
    mw.finish();
    std::cout << "holds: " << (cert.holds ? "true" : "false") << "  bound " << cert.bound_value
              << "  observed " << cert.observed_value << '\n';
    return cert.holds ? kExitOk : kExitValidationFailure;
}

int cmd_experiment(int table, const std::string& scale, int instances_flag, std::uint64_t seed,
                   const fs::path& out) {
    ManifestWriter mw("experiment", out);
    mw.manifest.seed = seed;
    mw.add("table", std::to_string(table));
    mw.add("scale", scale);

    const bool paper = scale == "paper";
    const Index n = paper ? 100 : kDeskN;
    const Index horizon = paper ? 30 : kDeskHorizon;
    int instances = paper ? 20 : kDeskInstances;
    if (instances_flag > 0) instances = instances_flag;
    mw.add("n", std::to_string(n));
    mw.add("horizon", std::to_string(horizon));
    mw.add("instances", std::to_string(instances));

    TableResult result;
    if (table == 1) {
        auto grid = desk_table1_grid();
        if (paper) {
            grid = {{0, 0.05}, {0, 0.1}, {0, 0.2}, {0, 0.3}, {0, 0.4}, {0, 0.5},
                    {0, 0.6},  {0, 0.7}, {0, 0.8}, {1, 2.5}, {1, 3.0}};
        }
        result = run_table1(n, horizon, instances, grid, seed);
    } else if (table == 2) {
        auto grid = desk_table2_grid();
        double omega_tilde = 10.0, omega_t = 3.0;
        if (paper) {
            grid = {{0, 0.05}, {0, 0.1}, {0, 0.2}, {0, 0.3}, {0, 0.4},
                    {0, 0.5},  {0, 0.6}, {0, 0.7}, {0, 0.8}};
        }
        result = run_table2(n, horizon, instances, grid, omega_tilde, omega_t, seed);
    } else {
        auto omega_tilde_grid = desk_table3_omega_tilde_grid();
        auto omega_t_grid = desk_table3_omega_t_grid();
        if (paper) {
            omega_tilde_grid = {2,  10, 20,  30,  40,  50,  60,  70, 80,
                                90, 100, 110, 120, 130, 140, 150, 160};
            omega_t_grid = {3.0, 4.5, 6.0, 8.0};
        }
        result = run_table3(n, horizon, instances, omega_tilde_grid, omega_t_grid,
                            NoiseSpec{0.0, 0.5}, seed);
    }

    mw.write_artifact("summary.csv", result.summary_csv);
    mw.write_artifact("raw.csv", result.raw_csv);
    for (const auto& [name, contents] : result.plot_data) mw.write_artifact(name, contents);
    mw.finish();
    std::cout << "cells: " << result.cells.size() << "  failed solves: " << result.failures
              << "\nwrote " << (out / "summary.csv").string() << '\n';
    return kExitOk;
}

int cmd_validate(const fs::path& problem_path, const fs::path& solution_path, double tol) {
    const MopulProblem problem = problem_from_json(Json::parse(read_text_file(problem_path)));
    const LoadedSolution loaded = solution_from_json(Json::parse(read_text_file(solution_path)));

    const std::vector<ConstraintMargin> margins = check_constraints(
        problem, loaded.extracted.a, loaded.extracted.controls, loaded.extracted.omega);
    bool ok = true;
    for (const ConstraintMargin& m : margins) {
        const bool pass = m.margin >= -tol;
        ok = ok && pass;
        std::cout << (pass ? "  ok   " : "  FAIL ") << m.name << "  margin " << m.margin << '\n';
    }
    std::cout << (ok ? "valid" : "invalid") << '\n';
    return ok ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tracking-problem toolkit: build, solve, certify, and sweep"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic problem instance");
    std::string gen_preset = "amopul1";
    Index gen_n = 5, gen_horizon = 4;
    std::uint64_t gen_seed = 1;
    double gen_mu = 0.0, gen_sigma = 0.0, gen_a_bound = 0.4, gen_u_bound = 0.5;
    double gen_omega_tilde = 10.0, gen_omega_t = 3.0;
    fs::path gen_out = ".";
    gen->add_option("--preset", gen_preset)->check(CLI::IsMember({"amopul1", "amopul2"}));
    gen->add_option("--n", gen_n)->check(CLI::PositiveNumber);
    gen->add_option("--N,--horizon", gen_horizon)->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--mu", gen_mu);
    gen->add_option("--sigma", gen_sigma)->check(CLI::NonNegativeNumber);
    gen->add_option("--a-bound", gen_a_bound);
    gen->add_option("--u-bound", gen_u_bound);
    gen->add_option("--omega-tilde", gen_omega_tilde);
    gen->add_option("--omega-t", gen_omega_t);
    gen->add_option("--out", gen_out);

    // solve
    auto* slv = app.add_subcommand("solve", "Solve a problem file");
    fs::path slv_problem;
    std::string slv_form = "soc";
    double slv_tol = 1e-8;
    int slv_iters = 200;
    fs::path slv_out = ".";
    slv->add_option("--problem", slv_problem)->required()->check(CLI::ExistingFile);
    slv->add_option("--form", slv_form)->check(CLI::IsMember({"soc", "lmi"}));
    slv->add_option("--tol", slv_tol)->check(CLI::PositiveNumber);
    slv->add_option("--max-iters", slv_iters)->check(CLI::PositiveNumber);
    slv->add_option("--out", slv_out);

    // bounds
    auto* bnd = app.add_subcommand("bounds", "Evaluate a guarantee certificate");
    std::string bnd_tag;
    fs::path bnd_problem, bnd_solution, bnd_q;
    std::optional<double> bnd_beta, bnd_omega_u, bnd_omega_c, bnd_gamma;
    std::vector<double> bnd_eps;
    Index bnd_horizon = 1;
    fs::path bnd_out = ".";
    bnd->add_option("--theorem", bnd_tag)
        ->required()
        ->check(CLI::IsMember({"t2", "t3", "t4", "t7", "r3"}));
    bnd->add_option("--problem", bnd_problem)->check(CLI::ExistingFile);
    bnd->add_option("--solution", bnd_solution)->check(CLI::ExistingFile);
    bnd->add_option("--beta", bnd_beta);
    bnd->add_option("--omega-u", bnd_omega_u);
    bnd->add_option("--omega-c", bnd_omega_c);
    bnd->add_option("--gamma", bnd_gamma);
    bnd->add_option("--eps", bnd_eps);
    bnd->add_option("--q", bnd_q);
    bnd->add_option("--N,--horizon", bnd_horizon);
    bnd->add_option("--out", bnd_out);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a sweep");
    int exp_table = 1;
    std::string exp_scale = "desk";
    int exp_instances = 0;
    std::uint64_t exp_seed = 1;
    fs::path exp_out = ".";
    exp->add_option("--table", exp_table)->check(CLI::Range(1, 3));
    exp->add_option("--scale", exp_scale)->check(CLI::IsMember({"desk", "paper"}));
    exp->add_option("--instances", exp_instances);
    exp->add_option("--seed", exp_seed);
    exp->add_option("--out", exp_out);

    // validate
    auto* val = app.add_subcommand("validate", "Re-check a solution against its problem");
    fs::path val_problem, val_solution;
    double val_tol = 1e-6;
    val->add_option("--problem", val_problem)->required()->check(CLI::ExistingFile);
    val->add_option("--solution", val_solution)->required()->check(CLI::ExistingFile);
    val->add_option("--tol", val_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(gen_preset, gen_n, gen_horizon, gen_seed, gen_mu, gen_sigma,
                                gen_a_bound, gen_u_bound, gen_omega_tilde, gen_omega_t, gen_out);
        }
        if (slv->parsed()) return cmd_solve(slv_problem, slv_form, slv_tol, slv_iters, slv_out);
        if (bnd->parsed()) {
            return cmd_bounds(bnd_tag, bnd_problem, bnd_solution, bnd_beta, bnd_omega_u,
                              bnd_omega_c, bnd_gamma, bnd_eps, bnd_q, bnd_horizon, bnd_out);
        }
        if (exp->parsed()) {
            return cmd_experiment(exp_table, exp_scale, exp_instances, exp_seed, exp_out);
        }
        if (val->parsed()) return cmd_validate(val_problem, val_solution, val_tol);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
