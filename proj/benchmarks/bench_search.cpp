#include "boxcert/bab.hpp"
#include "boxcert/control.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/optimize.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace boxcert;

namespace {

void BM_VerifyBranching(benchmark::State& state, Branching strategy) {
  const Graph g = fixtures::branching_graph();
  const Box box((Vector(2) << -1, -10).finished(), (Vector(2) << 1, 10).finished());
  const SpecCNF spec = fixtures::threshold_spec(box, 0.3);
  VerifyConfig cfg;
  cfg.branching = strategy;
  cfg.falsify = false;
  long domains = 0;
  for (auto _ : state) domains = verify(g, spec, cfg).stats.domains;
  state.counters["domains"] = static_cast<double>(domains);
}

void BM_PlanarLyapunov(benchmark::State& state) {
  LevelParams p;
  p.kappa = 0.054;
  p.rho = 4.78;
  const CertificateProblem prob =
      build_discrete_lyapunov(fixtures::linear_2d(), Box(Vector::Constant(2, -1), Vector::Constant(2, 1)), p);
  for (auto _ : state) benchmark::DoNotOptimize(verify(prob.graph, prob.spec, {}));
}

void BM_MinimizeSine(benchmark::State& state) {
  const Graph g = fixtures::sin_graph();
  const Box box(Vector::Zero(1), Vector::Constant(1, 2 * std::numbers::pi));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(g, Vector::Ones(1), box, nullptr, {}));
}

void BM_MinimizeTanhNet(benchmark::State& state) {
  const Graph g = fixtures::tanh_net(1);
  const Box box(Vector::Constant(2, -1), Vector::Constant(2, 1));
  OptConfig cfg;
  cfg.gap_tol = 1e-4;
  for (auto _ : state) benchmark::DoNotOptimize(minimize(g, Vector::Ones(1), box, nullptr, cfg));
}

}  // namespace

BENCHMARK_CAPTURE(BM_VerifyBranching, naive, Branching::Naive)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_VerifyBranching, smart, Branching::Smart)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanarLyapunov)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinimizeSine)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MinimizeTanhNet)->Unit(benchmark::kMillisecond);
