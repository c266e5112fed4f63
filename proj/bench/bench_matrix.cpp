#include "invergrid/matrix.hpp"

#include <benchmark/benchmark.h>

using namespace invergrid;

namespace {

void BM_FeederSolve(benchmark::State& state)
{
    const RadialFeeder feeder(build_cigre_lv_residential());
    std::vector<ComplexPower> inj(feeder.size());
    inj[feeder.index_of("R17")] = {0.475, 0.156};
    inj[feeder.index_of("R18")] = {0.475, 0.156};
    for (auto _ : state)
        benchmark::DoNotOptimize(feeder.solve(inj, 1.2));
}
BENCHMARK(BM_FeederSolve);

void BM_SingleRun(benchmark::State& state)
{
    ScenarioSpec spec;
    spec.a2.unit.mode = default_mode(ModeKind::VoltVar, 10.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(run(spec));
}
BENCHMARK(BM_SingleRun)->Unit(benchmark::kMillisecond);

void BM_MatrixSerial(benchmark::State& state)
{
    const auto specs = experiment_matrix(ScenarioSpec{});
    for (auto _ : state)
        benchmark::DoNotOptimize(run_matrix_serial(specs));
}
BENCHMARK(BM_MatrixSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_MatrixParallel(benchmark::State& state)
{
    const auto specs = experiment_matrix(ScenarioSpec{});
    for (auto _ : state)
        benchmark::DoNotOptimize(run_matrix(specs));
}
BENCHMARK(BM_MatrixParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
