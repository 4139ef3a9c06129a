#include <benchmark/benchmark.h>

#include "bethe/inference.hpp"
#include "bethe/learnability.hpp"
#include "bethe/learning.hpp"

using namespace bethe;

namespace {

TablePotentials torus_theta(int side, double mu_e) {
  Graph g = torus(side, side);
  return canonical_parameters(homogeneous_marginals(g, 0.5, mu_e), g);
}

}  // namespace

static void BM_SumProductTorus(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Graph g = torus(side, side);
  TablePotentials th = torus_theta(side, 0.3);
  th.node[0][1] += 0.5;  // off the fixed point
  for (auto _ : state) benchmark::DoNotOptimize(sum_product(th, g, {}));
  state.SetComplexityN(g.num_edges());
}
BENCHMARK(BM_SumProductTorus)->Arg(3)->Arg(6)->Arg(12)->Arg(24)->Complexity();

static void BM_MultiRestartTorus3(benchmark::State& state) {
  Graph g = torus(3, 3);
  TablePotentials th = torus_theta(3, 0.45);
  for (auto _ : state) benchmark::DoNotOptimize(multi_restart_bp(th, g, 20, 0, {}));
}
BENCHMARK(BM_MultiRestartTorus3);

static void BM_Lemma2Torus(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Graph g = torus(side, side);
  MinimalMarginals mu = homogeneous_marginals(g, 0.5, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(lemma2_test(mu, g));
}
BENCHMARK(BM_Lemma2Torus)->Arg(3)->Arg(5)->Arg(8);

static void BM_InnerBoundTorus(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  Graph g = torus(side, side);
  TablePotentials th = torus_theta(side, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(inner_bound_unique(th, g));
}
BENCHMARK(BM_InnerBoundTorus)->Arg(3)->Arg(8)->Arg(16);

static void BM_GridArgmax(benchmark::State& state) {
  Graph g = torus(3, 3);
  const double res = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(homogeneous_grid_argmax(g, 0.0, 0.39, res));
}
BENCHMARK(BM_GridArgmax)->Arg(100)->Arg(500);

static void BM_ClassifyClosedForm(benchmark::State& state) {
  Graph g = torus(3, 3);
  MinimalMarginals mu = homogeneous_marginals(g, 0.5, 0.3);
  ClassifyOptions o;
  o.empirical = false;
  for (auto _ : state) benchmark::DoNotOptimize(classify(mu, g, o));
}
BENCHMARK(BM_ClassifyClosedForm);
BENCHMARK_MAIN();
