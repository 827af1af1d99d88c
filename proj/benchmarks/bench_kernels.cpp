#include <benchmark/benchmark.h>

#include <random>

#include "bmadmm/admm.h"
#include "bmadmm/problem_io.h"
#include "bmadmm/rgd.h"

namespace {

using namespace bmadmm;

SparseSymMatrix random_maxcut(Index n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(p);
  GraphInstance g;
  g.n = n;
  for (Index i = 1; i <= n; ++i) {
    for (Index j = i + 1; j <= n; ++j) {
      if (keep(rng)) g.edges.push_back({i, j, 1.0});
    }
  }
  return maxcut_cost(g);
}

void BM_Spmm(benchmark::State& state) {
  const Index n = state.range(0);
  const SparseSymMatrix C = random_maxcut(n, 20.0 / static_cast<double>(n), 1);
  const ManifoldSpec spec = ManifoldSpec::sphere(n, default_rank(n));
  const FactorMatrix V = random_point(spec, 2);
  FactorMatrix out(n, spec.r);
  for (auto _ : state) {
    spmm(C, V, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * C.nnz() * spec.r);
}
BENCHMARK(BM_Spmm)->Arg(200)->Arg(800)->Arg(3200);

void BM_AdmmStep(benchmark::State& state) {
  const Index n = state.range(0);
  const SparseSymMatrix C = random_maxcut(n, 20.0 / static_cast<double>(n), 3);
  SolverOptions o;
  o.trace_every = 0;
  const AdmmSolver solver({C, ManifoldSpec::sphere(n, default_rank(n)), "bench"}, o);
  SolverState s = solver.initialize();
  for (auto _ : state) {
    solver.step(s);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_AdmmStep)->Arg(200)->Arg(800)->Arg(3200);

void BM_ProxAdmmStep(benchmark::State& state) {
  const Index q = state.range(0);
  const So3Instance inst = generate_so3(q, 0.05, 4);
  SolverOptions o;
  o.proximal = true;
  o.trace_every = 0;
  const AdmmSolver solver({inst.cost, ManifoldSpec{q, 3, default_rank(3 * q, 3)}, "bench"}, o);
  SolverState s = solver.initialize();
  for (auto _ : state) {
    solver.step(s);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_ProxAdmmStep)->Arg(50)->Arg(200);

void BM_RgdStep(benchmark::State& state) {
  const Index n = state.range(0);
  const SparseSymMatrix C = random_maxcut(n, 20.0 / static_cast<double>(n), 5);
  const ManifoldSpec spec = ManifoldSpec::sphere(n, default_rank(n));
  FactorMatrix sigma = random_point(spec, 6);
  const double step0 = 1.0 / CostNorms::compute(C).two;
  for (auto _ : state) {
    sigma = rgd_step(C, spec, sigma, {}, step0).sigma;
    benchmark::DoNotOptimize(sigma.data());
  }
}
BENCHMARK(BM_RgdStep)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
