#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mopul/bounds.hpp"
#include "mopul/model.hpp"
#include "mopul/rng.hpp"
#include "mopul/solver.hpp"

namespace mopul {

/// Synthetic ground truth: B = C = I, x0 = r0 drawn uniformly, A_hat with
/// N(0, 0.1^2) entries, each u_hat_t a constant vector with a U(-0.5, 0.5)
/// level, and x_hat rolled exactly. spec.references start as the clean
/// x_hat values.
struct IdealInstance {
    Matrix a_hat;
    std::vector<Vector> u_hat;
    std::vector<Vector> x_hat;  // x_hat_0 .. x_hat_N
    SystemSpec spec;
    std::uint64_t seed = 0;
};

struct NoiseSpec {
    double mu = 0.0;
    double sigma = 0.0;
};

struct MetricSummary {
    std::string metric;  // CE, ACE, REA, REU
    double mean = 0.0;
    double stddev = 0.0;  // sample convention (n-1); 0 for a single value
    int count = 0;
    std::vector<std::pair<std::string, std::string>> config;
};

IdealInstance gen_ideal(Index n, Index horizon, std::uint64_t seed);

/// r_t = x_hat_t + e_t with componentwise N(mu, sigma^2) noise, t = 1..N.
/// r_0 stays C*x0 by construction.
std::vector<Vector> perturb_refs(const IdealInstance& inst, const NoiseSpec& noise,
                                 std::uint64_t seed);

/// Rebuilds the system around a different reference list.
SystemSpec with_references(const SystemSpec& spec, std::vector<Vector> refs);

struct MetricValues {
    double ce = 0.0;   // exact re-rollout cumulative error
    double ace = 0.0;  // decoupled cumulative error
    std::optional<double> rea;  // ||A - A_hat||_F / ||A_hat||_F
    std::optional<double> reu;  // same with stacked controls
};

MetricValues compute_metrics(const IdealInstance& inst, const std::vector<Vector>& refs,
                             const ExtractedSolution& solution);

struct InstanceRecord {
    int instance = 0;
    std::string status;
    bool solved = false;
    MetricValues values;
};

struct SweepCell {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<InstanceRecord> rows;
    std::vector<MetricSummary> summaries;
    int failures = 0;
};

struct TableResult {
    std::vector<SweepCell> cells;
    std::string summary_csv;
    std::string raw_csv;
    std::map<std::string, std::string> plot_data;  // filename -> contents
    int failures = 0;
};

/// Box-constrained tracking sweep over reference noise: one cell per
/// (mu, sigma), `instances` fresh ground truths and noise draws per cell.
TableResult run_table1(Index n, Index horizon, int instances,
                       const std::vector<NoiseSpec>& noise_grid, std::uint64_t seed,
                       const SolverConfig& config = SolverConfig{});

/// Matrix-tracking sweep over reference noise at fixed levels
/// (omega_tilde, omega_t).
TableResult run_table2(Index n, Index horizon, int instances,
                       const std::vector<NoiseSpec>& noise_grid, double omega_tilde,
                       double omega_t, std::uint64_t seed,
                       const SolverConfig& config = SolverConfig{});

/// Matrix-tracking sweep over the level grid at fixed noise.
TableResult run_table3(Index n, Index horizon, int instances,
                       const std::vector<double>& omega_tilde_grid,
                       const std::vector<double>& omega_t_grid, const NoiseSpec& noise,
                       std::uint64_t seed, const SolverConfig& config = SolverConfig{});

// Desk-scale defaults. The level and noise grids are chosen so both the
// inactive and active regimes of the cumulative-error constraint appear at
// n = 20, where per-stage noise enters at about 4.9*sigma.
inline constexpr Index kDeskN = 20;
inline constexpr Index kDeskHorizon = 10;
inline constexpr int kDeskInstances = 10;
std::vector<NoiseSpec> desk_table1_grid();
std::vector<NoiseSpec> desk_table2_grid();
std::vector<double> desk_table3_omega_tilde_grid();
std::vector<double> desk_table3_omega_t_grid();

}  // namespace mopul
