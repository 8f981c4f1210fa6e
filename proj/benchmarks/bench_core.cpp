#include <benchmark/benchmark.h>

#include "corrugate/flatten.hpp"

using namespace corrugate;

static void BM_path_distance_field(benchmark::State& state) {
    Embedding e = families::flat_cube(2, 3, static_cast<int>(state.range(0)));
    PathMetric pm(e);
    for (auto _ : state)
        benchmark::DoNotOptimize(pm.distance_field(0));
}
BENCHMARK(BM_path_distance_field)->Arg(33)->Arg(65)->Arg(129);

static void BM_ripple_arclength(benchmark::State& state) {
    RippleParams p;
    p.amplitude = 0.1;
    p.omega = static_cast<double>(state.range(0));
    p.mask = BumpFunction::all_of(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(basic_ripple_arclength(p, 0.0, 1.0));
}
BENCHMARK(BM_ripple_arclength)->Arg(10)->Arg(100)->Arg(1000);

static void BM_principal_angles(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Mat a = Mat::Random(d, d / 2), b = Mat::Random(d, d / 2);
    Plane p = Plane::span(a), q = Plane::span(b);
    for (auto _ : state)
        benchmark::DoNotOptimize(principal_angles(p, q));
}
BENCHMARK(BM_principal_angles)->Arg(4)->Arg(8)->Arg(16);

static void BM_bake_curve_eval(benchmark::State& state) {
    Embedding baked = bake_curve(families::helix(257), 4097);
    Vec u(1);
    u << 0.37;
    for (auto _ : state)
        benchmark::DoNotOptimize(baked.eval(u));
}
BENCHMARK(BM_bake_curve_eval);

BENCHMARK_MAIN();
