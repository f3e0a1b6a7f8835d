#include "boxcert/boundprop.hpp"
#include "boxcert/fixtures.hpp"
#include "boxcert/jacobian.hpp"

#include <benchmark/benchmark.h>

using namespace boxcert;

namespace {

Box unit_box(int n) { return Box(Vector::Constant(n, -1), Vector::Constant(n, 1)); }

void BM_OutputBounds(benchmark::State& state, OpKind act, BoundMode mode) {
  const int width = static_cast<int>(state.range(0));
  const Graph g = random_graph(7, 3, width, {act}, 2, 1);
  const Box box = unit_box(2);
  for (auto _ : state) benchmark::DoNotOptimize(output_bounds(g, box, {}, mode));
  state.counters["nodes"] = g.size();
}

void BM_BatchBounds(benchmark::State& state) {
  const Graph g = random_graph(7, 3, 32, {OpKind::ReLU}, 2, 1);
  std::vector<Box> boxes;
  for (int k = 0; k < 64; ++k) {
    const double c = -1 + 2.0 * k / 63;
    boxes.push_back(Box(Vector::Constant(2, c - 0.05), Vector::Constant(2, c + 0.05)));
  }
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(output_bounds_batch(g, boxes, {}, BoundMode::CROWN, {}, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(boxes.size()));
}

void BM_GradientBounds(benchmark::State& state) {
  const AugmentedGraph ag = augment_with_jacobian(fixtures::tanh_net(1));
  const Box box = unit_box(2);
  for (auto _ : state) benchmark::DoNotOptimize(output_bounds(ag.graph, box, {}, BoundMode::CROWN));
}

}  // namespace

BENCHMARK_CAPTURE(BM_OutputBounds, relu_ibp, OpKind::ReLU, BoundMode::IBP)->RangeMultiplier(2)->Range(8, 64);
BENCHMARK_CAPTURE(BM_OutputBounds, relu_crown, OpKind::ReLU, BoundMode::CROWN)->RangeMultiplier(2)->Range(8, 64);
BENCHMARK_CAPTURE(BM_OutputBounds, tanh_crown, OpKind::Tanh, BoundMode::CROWN)->RangeMultiplier(2)->Range(8, 64);
BENCHMARK(BM_BatchBounds)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_GradientBounds);
