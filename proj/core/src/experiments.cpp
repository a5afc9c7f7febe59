#include "mopul/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace mopul {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string config_value(const SweepCell& cell, const std::string& key) {
    for (const auto& [k, v] : cell.config) {
        if (k == key) return v;
    }
    return "";
}

MetricSummary summarize(const std::string& metric, const std::vector<double>& values,
                        const SweepCell& cell) {
    MetricSummary s;
    s.metric = metric;
    s.count = static_cast<int>(values.size());
    s.config = cell.config;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

using ProblemBuilder =
    std::function<MopulProblem(const IdealInstance&, std::vector<Vector> refs)>;

SweepCell run_cell(Index n, Index horizon, int instances, const NoiseSpec& noise,
                   std::uint64_t seed, const ProblemBuilder& build,
                   const SolverConfig& config,
                   std::vector<std::pair<std::string, std::string>> cell_config,
                   const std::vector<std::string>& wanted) {
    SweepCell cell;
    cell.config = std::move(cell_config);
    const Rng root(seed);
    // Noise streams are keyed by the noise parameters only, so cells that
    // share a noise level see identical reference draws and level grids
    // never shift them.
    const std::string noise_key =
        "noise mu=" + fmt(noise.mu) + " sigma=" + fmt(noise.sigma);

    std::vector<double> ce, ace, rea, reu;
    for (int i = 0; i < instances; ++i) {
        const std::uint64_t inst_seed =
            Rng(seed).derive("instance", static_cast<std::uint64_t>(i)).next_u64();
        IdealInstance inst = gen_ideal(n, horizon, inst_seed);
        const std::uint64_t noise_seed =
            root.derive(noise_key, static_cast<std::uint64_t>(i)).next_u64();
        std::vector<Vector> refs = perturb_refs(inst, noise, noise_seed);

        InstanceRecord rec;
        rec.instance = i;
        try {
            const MopulProblem problem = build(inst, refs);
            const ConicProgram program = build_amopul(problem, ProgramForm::Soc);
            const Solution sol = solve(program, config);
            rec.status = to_string(sol.status);
            if (sol.status == SolveStatus::Optimal) {
                rec.solved = true;
                rec.values = compute_metrics(inst, refs, extract_solution(program, sol.x));
            }
        } catch (const std::exception& e) {
            rec.status = std::string("error: ") + e.what();
        }
        if (rec.solved) {
            ce.push_back(rec.values.ce);
            ace.push_back(rec.values.ace);
            if (rec.values.rea) rea.push_back(*rec.values.rea);
            if (rec.values.reu) reu.push_back(*rec.values.reu);
        } else {
            ++cell.failures;
        }
        cell.rows.push_back(std::move(rec));
    }

    for (const std::string& metric : wanted) {
        if (metric == "CE") cell.summaries.push_back(summarize("CE", ce, cell));
        if (metric == "ACE") cell.summaries.push_back(summarize("ACE", ace, cell));
        if (metric == "REA") cell.summaries.push_back(summarize("REA", rea, cell));
        if (metric == "REU") cell.summaries.push_back(summarize("REU", reu, cell));
    }
    return cell;
}

void render_csv(TableResult& result) {
    std::ostringstream summary;
    summary << "table,mu,sigma,omega_tilde,omega_t,metric,mean,std,count,failures\n";
    std::ostringstream raw;
    raw << "table,mu,sigma,omega_tilde,omega_t,instance,status,ce,ace,rea,reu\n";

    for (const SweepCell& cell : result.cells) {
        const std::string prefix = config_value(cell, "table") + "," +
                                   config_value(cell, "mu") + "," +
                                   config_value(cell, "sigma") + "," +
                                   config_value(cell, "omega_tilde") + "," +
                                   config_value(cell, "omega_t");
        for (const MetricSummary& s : cell.summaries) {
            summary << prefix << ',' << s.metric << ',' << fmt(s.mean) << ',' << fmt(s.stddev)
                    << ',' << s.count << ',' << cell.failures << '\n';
        }
        for (const InstanceRecord& rec : cell.rows) {
            raw << prefix << ',' << rec.instance << ',' << rec.status << ',';
            if (rec.solved) {
                raw << fmt(rec.values.ce) << ',' << fmt(rec.values.ace) << ','
                    << (rec.values.rea ? fmt(*rec.values.rea) : "") << ','
                    << (rec.values.reu ? fmt(*rec.values.reu) : "");
            } else {
                raw << ",,,";
            }
            raw << '\n';
        }
        result.failures += cell.failures;
    }
    result.summary_csv = summary.str();
    result.raw_csv = raw.str();
}

void render_plot(TableResult& result, const std::string& file, const std::string& metric,
                 const std::string& x_key,
                 const std::function<bool(const SweepCell&)>& filter = nullptr) {
    std::ostringstream os;
    os << "x,mean,std\n";
    for (const SweepCell& cell : result.cells) {
        if (filter && !filter(cell)) continue;
        for (const MetricSummary& s : cell.summaries) {
            if (s.metric != metric) continue;
            os << config_value(cell, x_key) << ',' << fmt(s.mean) << ',' << fmt(s.stddev)
               << '\n';
        }
    }
    result.plot_data[file] = os.str();
}

}  // namespace

IdealInstance gen_ideal(Index n, Index horizon, std::uint64_t seed) {
    if (n < 1 || horizon < 1) throw std::invalid_argument("need n >= 1 and horizon >= 1");
    IdealInstance inst;
    inst.seed = seed;
    const Rng root(seed);

    const Vector r0 = Rng(root).derive("r0").uniform_vector(n, -0.5, 0.5);
    inst.a_hat = Rng(root).derive("a_hat").normal_matrix(n, n, 0.0, 0.1);
    Rng level_rng = Rng(root).derive("u_level");
    inst.u_hat.reserve(static_cast<size_t>(horizon));
    for (Index t = 0; t < horizon; ++t) {
        inst.u_hat.push_back(Vector::Constant(n, level_rng.next_uniform(-0.5, 0.5)));
    }

    inst.x_hat.reserve(static_cast<size_t>(horizon) + 1);
    inst.x_hat.push_back(r0);
    for (Index t = 1; t <= horizon; ++t) {
        inst.x_hat.push_back(inst.a_hat * inst.x_hat.back() +
                             inst.u_hat[static_cast<size_t>(t - 1)]);
    }

    std::vector<Vector> refs(inst.x_hat.begin() + 1, inst.x_hat.end());
    inst.spec = SystemSpec(Matrix::Identity(n, n), Matrix::Identity(n, n), r0, std::move(refs));
    return inst;
}

std::vector<Vector> perturb_refs(const IdealInstance& inst, const NoiseSpec& noise,
                                 std::uint64_t seed) {
    if (noise.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
    const Rng root(seed);
    std::vector<Vector> refs;
    refs.reserve(inst.x_hat.size() - 1);
    for (size_t t = 1; t < inst.x_hat.size(); ++t) {
        Rng stage = Rng(root).derive("stage", static_cast<std::uint64_t>(t));
        refs.push_back(inst.x_hat[t] +
                       stage.normal_vector(inst.spec.n, noise.mu, noise.sigma));
    }
    return refs;
}

SystemSpec with_references(const SystemSpec& spec, std::vector<Vector> refs) {
    return SystemSpec(spec.b, spec.c, spec.x0, std::move(refs));
}

MetricValues compute_metrics(const IdealInstance& inst, const std::vector<Vector>& refs,
                             const ExtractedSolution& solution) {
    const SystemSpec spec = with_references(inst.spec, refs);
    MetricValues v;
    v.ce = cumulative_error(rollout_exact(spec, solution.a, solution.controls), spec);
    v.ace = cumulative_error(rollout_approx(spec, solution.a, solution.controls), spec);

    const double a_norm = inst.a_hat.norm();
    if (a_norm > 0.0) v.rea = (solution.a - inst.a_hat).norm() / a_norm;
    double u_norm = 0.0, u_diff = 0.0;
    for (size_t t = 0; t < inst.u_hat.size(); ++t) {
        u_norm += inst.u_hat[t].squaredNorm();
        u_diff += (solution.controls[t] - inst.u_hat[t]).squaredNorm();
    }
    if (u_norm > 0.0) v.reu = std::sqrt(u_diff) / std::sqrt(u_norm);
    return v;
}

TableResult run_table1(Index n, Index horizon, int instances,
                       const std::vector<NoiseSpec>& noise_grid, std::uint64_t seed,
                       const SolverConfig& config) {
    TableResult result;
    for (const NoiseSpec& noise : noise_grid) {
        std::vector<std::pair<std::string, std::string>> cc = {
            {"table", "1"},        {"n", fmt_short(static_cast<double>(n))},
            {"horizon", fmt_short(static_cast<double>(horizon))},
            {"mu", fmt_short(noise.mu)}, {"sigma", fmt_short(noise.sigma)},
        };
        result.cells.push_back(run_cell(
            n, horizon, instances, noise, seed,
            [](const IdealInstance& inst, std::vector<Vector> refs) {
                // The transition-matrix box must be wide enough for A to
                // absorb zero-mean reference noise (so the unbiased cells can
                // track exactly, with A drifting away from the ground truth as
                // the noise grows), while still binding under a mean shift.
                return preset_amopul1_box(with_references(inst.spec, std::move(refs)),
                                          1.0, 0.5);
            },
            config, std::move(cc), {"CE", "REA", "REU"}));
    }
    render_csv(result);
    render_plot(result, "table1_ce.csv", "CE", "sigma");
    render_plot(result, "table1_rea.csv", "REA", "sigma");
    render_plot(result, "table1_reu.csv", "REU", "sigma");
    return result;
}

TableResult run_table2(Index n, Index horizon, int instances,
                       const std::vector<NoiseSpec>& noise_grid, double omega_tilde,
                       double omega_t, std::uint64_t seed, const SolverConfig& config) {
    TableResult result;
    for (const NoiseSpec& noise : noise_grid) {
        std::vector<std::pair<std::string, std::string>> cc = {
            {"table", "2"},        {"n", fmt_short(static_cast<double>(n))},
            {"horizon", fmt_short(static_cast<double>(horizon))},
            {"mu", fmt_short(noise.mu)}, {"sigma", fmt_short(noise.sigma)},
            {"omega_tilde", fmt_short(omega_tilde)}, {"omega_t", fmt_short(omega_t)},
        };
        result.cells.push_back(run_cell(
            n, horizon, instances, noise, seed,
            [omega_tilde, omega_t](const IdealInstance& inst, std::vector<Vector> refs) {
                return preset_amopul2(with_references(inst.spec, std::move(refs)), inst.a_hat,
                                      inst.u_hat, omega_tilde, {omega_t});
            },
            config, std::move(cc), {"REA", "ACE"}));
    }
    render_csv(result);
    render_plot(result, "table2_rea.csv", "REA", "sigma");
    render_plot(result, "table2_ace.csv", "ACE", "sigma");
    return result;
}

TableResult run_table3(Index n, Index horizon, int instances,
                       const std::vector<double>& omega_tilde_grid,
                       const std::vector<double>& omega_t_grid, const NoiseSpec& noise,
                       std::uint64_t seed, const SolverConfig& config) {
    TableResult result;
    for (double omega_t : omega_t_grid) {
        for (double omega_tilde : omega_tilde_grid) {
            std::vector<std::pair<std::string, std::string>> cc = {
                {"table", "3"},        {"n", fmt_short(static_cast<double>(n))},
                {"horizon", fmt_short(static_cast<double>(horizon))},
                {"mu", fmt_short(noise.mu)}, {"sigma", fmt_short(noise.sigma)},
                {"omega_tilde", fmt_short(omega_tilde)}, {"omega_t", fmt_short(omega_t)},
            };
            result.cells.push_back(run_cell(
                n, horizon, instances, noise, seed,
                [omega_tilde, omega_t](const IdealInstance& inst, std::vector<Vector> refs) {
                    return preset_amopul2(with_references(inst.spec, std::move(refs)),
                                          inst.a_hat, inst.u_hat, omega_tilde, {omega_t});
                },
                config, std::move(cc), {"REA", "ACE"}));
        }
    }
    render_csv(result);
    for (double omega_t : omega_t_grid) {
        const std::string tag = fmt_short(omega_t);
        auto filter = [tag](const SweepCell& cell) {
            return config_value(cell, "omega_t") == tag;
        };
        render_plot(result, "table3_rea_omegat_" + tag + ".csv", "REA", "omega_tilde", filter);
        render_plot(result, "table3_ace_omegat_" + tag + ".csv", "ACE", "omega_tilde", filter);
    }
    return result;
}

std::vector<NoiseSpec> desk_table1_grid() {
    return {{0.0, 0.05}, {0.0, 0.1}, {0.0, 0.2}, {0.0, 0.4}, {0.0, 0.8}, {1.0, 3.0}};
}

std::vector<NoiseSpec> desk_table2_grid() {
    return {{0.0, 0.05}, {0.0, 0.1}, {0.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}};
}

std::vector<double> desk_table3_omega_tilde_grid() { return {2.0, 5.0, 10.0, 20.0, 40.0}; }

std::vector<double> desk_table3_omega_t_grid() { return {1.0, 1.5, 4.0}; }

}  // namespace mopul
