#include <rrde/rrde.hpp>

#include <benchmark/benchmark.h>

using namespace rrde;

namespace {

GridPath brownian(std::size_t nodes, std::size_t dim, std::uint64_t seed, double vol)
{
    GeneratorSpec s;
    s.kind = GeneratorKind::Brownian;
    s.dim = dim;
    s.seed = seed;
    s.volatility = vol;
    return generate(s, TimeGrid::uniform(1.0, nodes));
}

GridPath barrier(std::size_t nodes, std::size_t dim)
{
    GeneratorSpec s;
    s.kind = GeneratorKind::SmoothSine;
    s.dim = dim;
    s.start = Vector::Constant(static_cast<Eigen::Index>(dim), -0.3);
    s.amplitude = 0.2;
    s.frequency = 2.0;
    return generate(s, TimeGrid::uniform(1.0, nodes));
}

void BM_PVariationDP(benchmark::State& state)
{
    const GridPath x = brownian(static_cast<std::size_t>(state.range(0)), 2, 1, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(p_variation(x, 2.5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PVariationDP)->RangeMultiplier(2)->Range(64, 2048)->Complexity(benchmark::oNSquared);

void BM_RunningVariation(benchmark::State& state)
{
    const GridPath x = brownian(static_cast<std::size_t>(state.range(0)), 2, 2, 1.0);
    for (auto _ : state) {
        RunningVariation rv(0, 2.5, [&x](std::size_t i, std::size_t j) { return (x.node(j) - x.node(i)).norm(); });
        for (std::size_t j = 1; j < x.size(); ++j) rv.extend();
        benchmark::DoNotOptimize(rv.value());
    }
}
BENCHMARK(BM_RunningVariation)->RangeMultiplier(4)->Range(64, 1024);

void BM_Skorokhod(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const GridPath y = brownian(n, 3, 3, 1.0);
    const GridPath l = barrier(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(skorokhod_solve(y, l));
}
BENCHMARK(BM_Skorokhod)->RangeMultiplier(8)->Range(512, 32768);

void BM_Lift(benchmark::State& state)
{
    const GridPath x = brownian(static_cast<std::size_t>(state.range(0)), 3, 4, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(Level2RoughPath::left_point_lift(x));
}
BENCHMARK(BM_Lift)->RangeMultiplier(8)->Range(512, 32768);

void BM_YoungSolve(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorField f = standard_field("tanh", 2, 2);
    const GridPath a = brownian(n, 2, 5, 0.5);
    const GridPath x = brownian(n, 2, 6, 0.1);
    const GridPath l = barrier(n, 2);
    YoungSolveConfig cfg;
    cfg.p = 2.2;
    cfg.q = 1.2;
    for (auto _ : state) benchmark::DoNotOptimize(solve_reflected_young(f, Vector::Constant(2, 0.1), a, x, l, cfg));
}
BENCHMARK(BM_YoungSolve)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_RoughSolve(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const VectorField f = standard_field("tanh_lower", 2, 2);
    const Level2RoughPath x = Level2RoughPath::left_point_lift(brownian(n, 2, 7, 1.0));
    const GridPath l = barrier(n, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_reflected_rde(f, Vector::Constant(2, 0.1), x, l, RdeSolveConfig{}));
}
BENCHMARK(BM_RoughSolve)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
