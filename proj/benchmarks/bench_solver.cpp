#include <benchmark/benchmark.h>

#include "mopul/experiments.hpp"

namespace {

using namespace mopul;

MopulProblem tracking_problem(Index n, Index horizon) {
    IdealInstance inst = gen_ideal(n, horizon, 42);
    std::vector<Vector> refs = perturb_refs(inst, NoiseSpec{0.0, 0.1}, 7);
    return preset_amopul1_box(with_references(inst.spec, std::move(refs)));
}

void BM_BuildSocProgram(benchmark::State& state) {
    const MopulProblem problem = tracking_problem(state.range(0), 10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_amopul(problem, ProgramForm::Soc));
    }
}
BENCHMARK(BM_BuildSocProgram)->Arg(10)->Arg(20);

void BM_SolveTracking(benchmark::State& state) {
    const MopulProblem problem = tracking_problem(state.range(0), 10);
    const ConicProgram program = build_amopul(problem, ProgramForm::Soc);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(program));
    }
}
BENCHMARK(BM_SolveTracking)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PolyError(benchmark::State& state) {
    IdealInstance inst = gen_ideal(state.range(0), 10, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(poly_error(inst.spec, inst.a_hat, inst.u_hat, 10));
    }
}
BENCHMARK(BM_PolyError)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
