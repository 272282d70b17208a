// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "graphinformer/attention.hpp"
#include "graphinformer/batch.hpp"
#include "graphinformer/builtin_graphs.hpp"
#include "graphinformer/ops.hpp"
#include "graphinformer/routes.hpp"
#include "graphinformer/separation.hpp"
#include "graphinformer/synth.hpp"
#include "graphinformer/wl.hpp"

namespace {

using namespace gi;

Tensor random_tensor(Rng& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = uniform(rng, -1.0, 1.0);
  return t;
}

struct MHSAFixture {
  AttentionConfig config;
  ParameterStore store;
  RouteMHSAParams params;
  BatchedGraphs batch;
  Tensor h;

  MHSAFixture(std::size_t n, std::size_t graphs) {
    Rng rng(1);
    config.n_heads = 6;
    config.radii = {2};
    RouteFeatureConfig rc;
    rc.histogram_k = 4;
    rc.log_histogram = true;
    std::vector<Graph> gs;
    std::vector<RouteTensor> rs;
    for (std::size_t i = 0; i < graphs; ++i) {
      gs.push_back(random_connected_graph(rng, n, 4.0 / static_cast<double>(n)));
      rs.push_back(route_features(gs.back(), rc));
    }
    batch = gi::batch(gs, rs, true);
    params = RouteMHSAParams::create(store, "attn", config, 48, rc.feature_count(), rng);
    h = random_tensor(rng, {graphs, batch.max_nodes, 48});
  }
};

void route_mhsa_forward(benchmark::State& state, RouteSchedule schedule) {
  MHSAFixture f(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    Tape tape;
    Var out = route_mhsa(tape, tape.constant(f.h), tape.constant(f.batch.routes), f.batch, f.params, f.config,
                         schedule);
    benchmark::DoNotOptimize(out.value().data().data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_RouteMHSAFactored(benchmark::State& state) { route_mhsa_forward(state, RouteSchedule::factored); }
BENCHMARK(BM_RouteMHSAFactored)
    ->ArgName("N")
    ->RangeMultiplier(2)
    ->Range(8, 64)
    ->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMicrosecond);

void BM_RouteMHSAMaterialized(benchmark::State& state) { route_mhsa_forward(state, RouteSchedule::materialized); }
BENCHMARK(BM_RouteMHSAMaterialized)
    ->ArgName("N")
    ->RangeMultiplier(2)
    ->Range(8, 64)
    ->Complexity(benchmark::oNSquared)
    ->Unit(benchmark::kMicrosecond);

void BM_RouteMHSABackward(benchmark::State& state) {
  MHSAFixture f(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    Tape tape;
    Var h = tape.variable(f.h);
    Var out = route_mhsa(tape, h, tape.constant(f.batch.routes), f.batch, f.params, f.config);
    tape.backward(sum(out));
    benchmark::DoNotOptimize(tape.grad(h).data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RouteMHSABackward)->ArgName("N")->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMicrosecond);

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Tensor a = random_tensor(rng, {n, n}), b = random_tensor(rng, {n, n});
  for (auto _ : state) {
    Tape tape;
    Var c = matmul(tape.constant(a), tape.constant(b));
    benchmark::DoNotOptimize(c.value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->ArgName("n")->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

void BM_RouteFeatures(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = random_connected_graph(rng, n, 4.0 / static_cast<double>(n));
  RouteFeatureConfig rc;
  rc.histogram_k = 4;
  for (auto _ : state) benchmark::DoNotOptimize(route_features(g, rc));
}
BENCHMARK(BM_RouteFeatures)->ArgName("N")->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);

void BM_WLRefine(benchmark::State& state) {
  const auto gs = builtin_graphs("Q4vsHoffman");
  for (auto _ : state) benchmark::DoNotOptimize(wl_distinguish(gs[0], gs[1]));
}
BENCHMARK(BM_WLRefine)->Unit(benchmark::kMicrosecond);

void BM_SeparateRegN8D3(benchmark::State& state) {
  const auto gs = builtin_graphs("RegN8D3");
  for (auto _ : state) benchmark::DoNotOptimize(gi_separate(gs, isomorphism_config(1), "RegN8D3"));
}
BENCHMARK(BM_SeparateRegN8D3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
