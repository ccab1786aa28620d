#include <benchmark/benchmark.h>

#include "condenser/balayage.hpp"
#include "condenser/green.hpp"
#include "condenser/kernel.hpp"
#include "condenser/qp.hpp"

namespace {

using namespace condenser;

const ExampleGeometry& concentric_geom() {
  static const ExampleGeometry g = generate_example(ExampleName::Concentric, 10, 4.0);
  return g;
}

void bm_assemble(benchmark::State& state) {
  const ExampleGeometry& g = concentric_geom();
  for (auto _ : state) {
    KernelOperator K = assemble(g.cloud, 2.0);
    benchmark::DoNotOptimize(K.m.data());
  }
}
BENCHMARK(bm_assemble)->Unit(benchmark::kMillisecond);

void bm_projection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::VectorXd v(n), caps(n);
  for (int i = 0; i < n; ++i) {
    v(i) = std::sin(0.7 * i) + 0.3;
    caps(i) = 2.0 / n;
  }
  for (auto _ : state) {
    Eigen::VectorXd w = project_capped_simplex(v, caps, 1.0);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(bm_projection)->Arg(256)->Arg(2048)->Arg(16384);

void bm_columns(benchmark::State& state) {
  const ExampleGeometry& g = concentric_geom();
  const KernelOperator K = assemble(g.cloud, 2.0);
  for (auto _ : state) {
    // fresh operator content defeats the cache so the solve cost is visible
    KernelOperator K2 = K;
    K2.alpha = 2.0 - 1e-9 * (state.iterations() + 1);
    Eigen::MatrixXd B = balayage_columns(K2);
    benchmark::DoNotOptimize(B.data());
  }
}
BENCHMARK(bm_columns)->Unit(benchmark::kMillisecond)->Iterations(3);

void bm_equilibrium_qp(benchmark::State& state) {
  const ExampleGeometry& g = concentric_geom();
  const KernelOperator K = assemble(g.cloud, 2.0);
  const Eigen::MatrixXd B = balayage_columns(K);
  const KernelOperator G = green_matrix(K, B);
  QpProblem p;
  p.Q = &G.m;
  p.mass = 1.0;
  for (auto _ : state) {
    QpSolution s = solve(p);
    benchmark::DoNotOptimize(s.w.data());
  }
}
BENCHMARK(bm_equilibrium_qp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
