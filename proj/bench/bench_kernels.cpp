// Serial vs OpenMP kernels on realistic sizes.
//
//   ./bench/bench_kernels --benchmark_counters_tabular=true
//
// The fd Jacobian benchmark differentiates the CMC gradient of a perturbed
// circle, which is what the continuation falls back to when no analytic
// linearization is available.

#include "eqcont/cmc.hpp"
#include "eqcont/kernels.hpp"

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>

namespace {

using namespace eqc;

int threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

struct CmcField {
  ProblemInstance problem;
  Vec x;

  explicit CmcField(Index n) {
    const Grid grid = make_grid(n);
    const cmc::Ambient2D amb = cmc::make_ambient(cmc::AmbientKind::Plane);
    problem = cmc::make_cmc_problem(amb, cmc::circle_reference(grid), Scheme::Spectral);
    x = Vec(n);
    for (Index j = 0; j < n; ++j) x[j] = 0.05 * std::cos(2.0 * grid.node(j)) + 0.02 * std::sin(3.0 * grid.node(j));
  }

  kernels::VectorField field() const {
    return [this](const Vec& y) { return problem.gradient(y, 1.0); };
  }
};

template <bool Parallel>
void BM_fd_jacobian(benchmark::State& state) {
  const CmcField f(state.range(0));
  const kernels::VectorField field = f.field();
  for (auto _ : state) {
    Mat j = Parallel ? kernels::fd_jacobian_parallel(field, f.x, 1e-6) : kernels::fd_jacobian_serial(field, f.x, 1e-6);
    benchmark::DoNotOptimize(j.data());
  }
  state.counters["threads"] = Parallel ? threads() : 1;
  state.SetComplexityN(state.range(0));
}

template <bool Parallel>
void BM_shift_matrix(benchmark::State& state) {
  const Grid grid = make_grid(state.range(0));
  for (auto _ : state) {
    Mat s = Parallel ? kernels::shift_matrix_parallel(grid, 0.123) : kernels::shift_matrix_serial(grid, 0.123);
    benchmark::DoNotOptimize(s.data());
  }
  state.counters["threads"] = Parallel ? threads() : 1;
}

}  // namespace

BENCHMARK(BM_fd_jacobian<false>)->Name("fd_jacobian/serial")->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fd_jacobian<true>)->Name("fd_jacobian/parallel")->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shift_matrix<false>)->Name("shift_matrix/serial")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_shift_matrix<true>)->Name("shift_matrix/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
