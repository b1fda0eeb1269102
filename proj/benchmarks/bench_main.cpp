#include <benchmark/benchmark.h>

#include "sobolev/constants.hpp"
#include "sobolev/extremals.hpp"
#include "sobolev/solver.hpp"

using namespace sobolev;

static void BM_BubbleQuotient(benchmark::State& state) {
  const int N = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bubble_rayleigh_quotient(5, 1.0, 1.0, N));
}
BENCHMARK(BM_BubbleQuotient)->Arg(1024)->Arg(4096)->Arg(16384);

static void BM_MaxOnDirectionSphere(benchmark::State& state) {
  const int k = int(state.range(0));
  const auto f = HomogeneousPotential::lq_power(k, 1.0, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(max_on_direction_sphere(f).M_F);
}
BENCHMARK(BM_MaxOnDirectionSphere)->Arg(2)->Arg(3)->Arg(4);

static void BM_Smoothing(benchmark::State& state) {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(smooth(f, 0.01).width);
}
BENCHMARK(BM_Smoothing);

static void BM_TorusMinimize(benchmark::State& state) {
  const auto F = HomogeneousPotential::lq_power(2, 2.0, 4.0);
  const VariationalProblem p{ModelManifold::flat_torus(4, 2.0), F,
                             SpatialPotential::uniform(HomogeneousPotential::lq_power(2, 2.0, 2.0)),
                             a0_vector(4, F), 0.2};
  SolverConfig cfg;
  cfg.grid_N = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(p, cfg).lambda);
}
BENCHMARK(BM_TorusMinimize)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_SphereExtremalResidual(benchmark::State& state) {
  const int n = 5;
  const auto grid = make_grid(ModelManifold::round_sphere(n), {int(state.range(0))});
  const InequalityConstants c{a0_euclidean(n), b0_scalar_sphere(n)};
  for (auto _ : state) {
    const auto U = sphere_extremal_profile({n, 1.1, {1.0}}, grid);
    benchmark::DoNotOptimize(equality_residual(U, Inequality::BOpt, c).relative);
  }
}
BENCHMARK(BM_SphereExtremalResidual)->Arg(2048)->Arg(8192);
BENCHMARK_MAIN();
