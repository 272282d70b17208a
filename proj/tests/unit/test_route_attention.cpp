// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "graphinformer/attention.hpp"
#include "graphinformer/batch.hpp"
#include "graphinformer/builtin_graphs.hpp"
#include "graphinformer/errors.hpp"
#include "graphinformer/gradcheck.hpp"
#include "graphinformer/ops.hpp"
#include "graphinformer/params.hpp"
#include "graphinformer/routes.hpp"
#include "oracles.hpp"

namespace gi {
namespace {

using oracle::Matrix;
using oracle::max_abs_diff;
using oracle::random_tensor;

Matrix slice(const Tensor& t, std::size_t g, std::size_t rows, std::size_t cols) {
  Matrix m = oracle::zeros(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m[r][c] = t[(g * rows + r) * cols + c];
  return m;
}

std::vector<Matrix> slice_pairs(const Tensor& t, std::size_t g, std::size_t n, std::size_t d) {
  std::vector<Matrix> out(n, oracle::zeros(n, d));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < d; ++i) out[k][l][i] = t[((g * n + k) * n + l) * d + i];
  return out;
}

struct Fixture {
  AttentionConfig config;
  std::size_t d_model = 5;
  std::size_t f_route = 3;
  ParameterStore store;
  RouteMHSAParams params;

  Fixture(AttentionConfig c, std::uint64_t seed, std::size_t d = 5, std::size_t f = 3)
      : config(std::move(c)), d_model(d), f_route(f) {
    Rng rng(seed);
    params = RouteMHSAParams::create(store, "attn", config, d_model, f_route, rng);
  }

  Tensor run(const BatchedGraphs& b, const Tensor& h, RouteSchedule schedule = RouteSchedule::factored,
             std::vector<Tensor>* probs = nullptr) const {
    Tape tape;
    Var out = route_mhsa(tape, tape.constant(h), tape.constant(b.routes), b, params, config, schedule, probs);
    return out.value();
  }
};

AttentionConfig small_config(std::size_t heads, ScoreMap map, std::vector<std::optional<int>> radii = {}) {
  AttentionConfig c;
  c.n_heads = heads;
  c.d_k = 3;
  c.d_v = 2;
  c.d_r = 2;
  c.score_map = map;
  c.radii = std::move(radii);
  return c;
}

BatchedGraphs make_batch(const std::vector<Graph>& graphs, std::size_t k, bool pool) {
  std::vector<RouteTensor> routes;
  RouteFeatureConfig rc;
  rc.histogram_k = k;
  rc.log_histogram = true;
  for (const Graph& g : graphs) routes.push_back(route_features(g, rc));
  return batch(graphs, routes, pool);
}

TEST(RouteScores, Examples) {
  Rng rng(1);
  const std::size_t N = 4, dk = 3, dr = 2;
  Tensor q = random_tensor(rng, {1, N, dk}), k = random_tensor(rng, {1, N, dk}), qr = random_tensor(rng, {1, N, dr});
  Tensor kr = random_tensor(rng, {1, N, N, dr});
  Tensor mask(Shape{1, N, N});
  Tape tape;
  Var zero_kr = tape.constant(Tensor(Shape{1, N, N, dr}));
  Var s = route_scores(tape.constant(q), tape.constant(k), tape.constant(qr), zero_kr, mask);
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dk; ++i) dot += q[a * dk + i] * k[b * dk + i];
      EXPECT_NEAR(s.value()[a * N + b], dot / std::sqrt(5.0), 1e-14);
    }
  Var zq = tape.constant(Tensor(Shape{1, N, dk}));
  Var s2 = route_scores(zq, zq, tape.constant(qr), tape.constant(kr), mask);
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dr; ++i) dot += qr[a * dr + i] * kr[(a * N + b) * dr + i];
      EXPECT_NEAR(s2.value()[a * N + b], dot / std::sqrt(5.0), 1e-14);
    }
}

TEST(RouteScores, MatchesLoopOracleWithSharedRoutes) {
  Rng rng(2);
  const std::size_t H = 3, B = 2, N = 5, dk = 4, dr = 3;
  Tensor q = random_tensor(rng, {B * H, N, dk}), k = random_tensor(rng, {B * H, N, dk});
  Tensor qr = random_tensor(rng, {B * H, N, dr}), kr = random_tensor(rng, {B, N, N, dr});
  Tensor mask = random_tensor(rng, {B * H, N, N});
  Tape tape;
  Var s = route_scores(tape.constant(q), tape.constant(k), tape.constant(qr), tape.constant(kr), mask);
  for (std::size_t g = 0; g < B * H; ++g) {
    Matrix ref = oracle::route_scores(slice(q, g, N, dk), slice(k, g, N, dk), slice(qr, g, N, dr),
                                      slice_pairs(kr, g / H, N, dr), slice(mask, g, N, N));
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b) EXPECT_NEAR(s.value()[(g * N + a) * N + b], ref[a][b], 1e-12);
  }
}

TEST(AttentionProbs, Examples) {
  Tape tape;
  Var row = tape.constant(Tensor(Shape{1, 1, 3}, {0.0, 0.0, kMaskValue}));
  Var a = attention_probs(row, ScoreMap::softmax);
  EXPECT_DOUBLE_EQ(a.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(a.value()[1], 0.5);
  EXPECT_LE(a.value()[2], 1e-12);
  Var s = attention_probs(row, ScoreMap::sigmoid);
  EXPECT_EQ(s.value()[0], 0.5);
  EXPECT_EQ(s.value()[2], 0.0);
}

TEST(RouteAttn, Examples) {
  Rng rng(3);
  const std::size_t N = 3, dv = 2;
  Tensor eye(Shape{1, N, N});
  for (std::size_t i = 0; i < N; ++i) eye[i * N + i] = 1.0;
  Tensor v = random_tensor(rng, {1, N, dv}), vr = random_tensor(rng, {1, N, N, dv});
  Tape tape;
  Var out = route_attn(tape.constant(eye), tape.constant(v), tape.constant(Tensor(Shape{1, N, N, dv})));
  EXPECT_EQ(max_abs_diff(out.value().data(), v.data()), 0.0);
  Var out2 = route_attn(tape.constant(eye), tape.constant(Tensor(Shape{1, N, dv})), tape.constant(vr));
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < dv; ++i) EXPECT_EQ(out2.value()[k * dv + i], vr[((k * N) + k) * dv + i]);
}

TEST(RouteAttn, MatchesTripleLoopOracle) {
  Rng rng(4);
  const std::size_t H = 2, B = 2, N = 4, dv = 3;
  Tensor a = random_tensor(rng, {B * H, N, N}), v = random_tensor(rng, {B * H, N, dv});
  Tensor vr = random_tensor(rng, {B, N, N, dv});
  Tape tape;
  Var out = route_attn(tape.constant(a), tape.constant(v), tape.constant(vr));
  for (std::size_t g = 0; g < B * H; ++g) {
    Matrix ref = oracle::route_attn(slice(a, g, N, N), slice(v, g, N, dv), slice_pairs(vr, g / H, N, dv));
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t i = 0; i < dv; ++i) EXPECT_NEAR(out.value()[(g * N + k) * dv + i], ref[k][i], 1e-12);
  }
}

// Full per-head reference for one unpadded, pool-free sample.
Matrix mhsa_oracle(const Fixture& fx, const Graph& g, const Tensor& h, const Tensor& routes, std::size_t n) {
  const auto& c = fx.config;
  const Matrix x = slice(h, 0, n, fx.d_model);
  const std::vector<Matrix> p = slice_pairs(routes, 0, n, fx.f_route);
  const auto dist = oracle::bfs_distances(g);
  Matrix out = oracle::zeros(n, c.n_heads * c.d_v);
  for (std::size_t head = 0; head < c.n_heads; ++head) {
    Matrix mask = oracle::zeros(n, n);
    const auto radius = c.radius_of(head);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (radius && (dist[a][b] < 0 || dist[a][b] > *radius)) mask[a][b] = kMaskValue;
    Matrix s = oracle::route_scores(oracle::project(*fx.params.w_query, head, c.d_k, x),
                                    oracle::project(*fx.params.w_key, head, c.d_k, x),
                                    oracle::project(*fx.params.w_route_query, head, c.d_r, x),
                                    oracle::project_pairs(*fx.params.w_route_key, head, c.d_r, p), mask);
    Matrix a = s;
    if (c.score_map == ScoreMap::softmax) {
      a = oracle::softmax_rows(s);
    } else {
      for (auto& row : a)
        for (double& e : row) e = 1.0 / (1.0 + std::exp(-e));
    }
    Matrix o = oracle::route_attn(a, oracle::project(*fx.params.w_value, head, c.d_v, x),
                                  oracle::project_pairs(*fx.params.w_route_value, head, c.d_v, p));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < c.d_v; ++i) out[k][head * c.d_v + i] = o[k][i];
  }
  return out;
}

TEST(RouteMHSA, MatchesPerHeadOracle) {
  Rng rng(5);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    for (auto radii : {std::vector<std::optional<int>>{}, std::vector<std::optional<int>>{1, 2, std::nullopt}}) {
      Fixture fx(small_config(3, map, radii), 11);
      Graph g = oracle::random_graph(rng, 6, 0.4);
      BatchedGraphs b = make_batch({g}, 3, false);
      Tensor h = random_tensor(rng, {1, 6, fx.d_model});
      const Matrix ref = mhsa_oracle(fx, g, h, b.routes, 6);
      for (RouteSchedule sched : {RouteSchedule::factored, RouteSchedule::materialized}) {
        Tensor out = fx.run(b, h, sched);
        ASSERT_EQ(out.shape(), (Shape{1, 6, 6}));
        for (std::size_t k = 0; k < 6; ++k)
          for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(out[k * 6 + i], ref[k][i], 1e-12);
      }
    }
  }
}

TEST(RouteMHSA, HandComputedTwoNodes) {
  AttentionConfig c;
  c.n_heads = 1;
  c.d_k = c.d_v = c.d_r = 1;
  Fixture fx(c, 1, 1, 1);
  for (Tensor* w : fx.params.all()) w->data()[0] = 1.0;
  const std::vector<Edge> e{{0, 1}};
  Graph g = Graph::from_edges(2, e);
  std::vector<Graph> gs{g};
  std::vector<RouteTensor> rs{route_histogram(g, 1)};
  BatchedGraphs b = batch(gs, rs, false);
  Tensor h(Shape{1, 2, 1}, {1.0, 2.0});
  // S = [[1, 3], [4, 4]] / sqrt(2); V + V_R = [[1, 3], [2, 2]].
  const double a01 = 1.0 / (1.0 + std::exp(-2.0 / std::sqrt(2.0)));
  const double expected0 = (1.0 - a01) * 1.0 + a01 * 3.0;
  const double expected1 = 0.5 * 2.0 + 0.5 * 2.0;
  for (RouteSchedule sched : {RouteSchedule::factored, RouteSchedule::materialized}) {
    Tensor out = fx.run(b, h, sched);
    EXPECT_NEAR(out[0], expected0, 1e-15);
    EXPECT_NEAR(out[1], expected1, 1e-15);
  }
}

TEST(RouteMHSA, SchedulesAgreeOnPaddedPooledBatch) {
  Rng rng(6);
  Fixture fx(small_config(2, ScoreMap::softmax, {2}), 12);
  std::vector<Graph> gs{oracle::random_graph(rng, 4, 0.6), oracle::random_graph(rng, 7, 0.3),
                        oracle::random_graph(rng, 5, 0.5)};
  BatchedGraphs b = make_batch(gs, 3, true);
  Tensor h = random_tensor(rng, {3, b.max_nodes, fx.d_model});
  std::vector<Tensor> pf, pm;
  Tensor f = fx.run(b, h, RouteSchedule::factored, &pf);
  Tensor m = fx.run(b, h, RouteSchedule::materialized, &pm);
  EXPECT_LT(max_abs_diff(f, m), 1e-12);
  ASSERT_EQ(pf.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(max_abs_diff(pf[i], pm[i]), 1e-12);
}

// Real-node outputs of sample `s` in a batch against the same graph alone.
double padding_gap(const Fixture& fx, const std::vector<Graph>& gs, std::size_t s, bool pool, Rng& rng) {
  BatchedGraphs big = make_batch(gs, 3, pool);
  BatchedGraphs alone = make_batch({gs[s]}, 3, pool);
  const std::size_t n = gs[s].size(), d = fx.d_model, N = big.max_nodes, n1 = alone.max_nodes;
  Tensor h_alone = random_tensor(rng, {1, n1, d});
  Tensor h_big = random_tensor(rng, {gs.size(), N, d}, 100.0);  // garbage in padded slots
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < d; ++i) h_big[((s * N) + v) * d + i] = h_alone[v * d + i];
  if (pool) {
    for (std::size_t i = 0; i < d; ++i) h_big[((s * N) + N - 1) * d + i] = h_alone[(n1 - 1) * d + i];
  }
  Tensor a = fx.run(big, h_big), b = fx.run(alone, h_alone);
  const std::size_t w = a.shape()[2];
  double gap = 0.0;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < w; ++i) gap = std::max(gap, std::abs(a[((s * N) + v) * w + i] - b[v * w + i]));
  return gap;
}

TEST(RouteMHSA, PaddingDoesNotLeak) {
  Rng rng(7);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    Fixture fx(small_config(2, map, {1}), 13);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Graph> gs{oracle::random_graph(rng, 3 + trial % 4, 0.5), oracle::random_graph(rng, 9, 0.3)};
      EXPECT_LT(padding_gap(fx, gs, 0, false, rng), 1e-10);
      EXPECT_LT(padding_gap(fx, gs, 0, true, rng), 1e-10);
      EXPECT_LT(padding_gap(fx, gs, 1, true, rng), 1e-10);
    }
  }
}

TEST(RouteMHSA, PermutationEquivariant) {
  Rng rng(8);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    Fixture fx(small_config(2, map, {2}), 14);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 3 + static_cast<std::size_t>(trial) % 6;
      Graph g = oracle::random_graph(rng, n, 0.4);
      const auto perm = oracle::random_permutation(rng, n);
      BatchedGraphs b = make_batch({g}, 3, false);
      BatchedGraphs bp = make_batch({g.permuted(perm)}, 3, false);
      Tensor h = random_tensor(rng, {1, n, fx.d_model}), hp(h.shape());
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < fx.d_model; ++i) hp[perm[v] * fx.d_model + i] = h[v * fx.d_model + i];
      Tensor out = fx.run(b, h), outp = fx.run(bp, hp);
      const std::size_t w = out.shape()[2];
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < w; ++i) EXPECT_NEAR(outp[perm[v] * w + i], out[v * w + i], 1e-10);
    }
  }
}

TEST(RouteMHSA, Locality) {
  Rng rng(9);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    for (int r = 0; r <= 2; ++r) {
      Fixture fx(small_config(2, map, {r}), 15);
      for (int trial = 0; trial < 10; ++trial) {
        Graph g = oracle::random_graph(rng, 8, 0.25);
        BatchedGraphs b = make_batch({g}, 3, true);
        Tensor h = random_tensor(rng, {1, b.max_nodes, fx.d_model}, 3.0);
        std::vector<Tensor> probs;
        fx.run(b, h, RouteSchedule::factored, &probs);
        const auto dist = oracle::bfs_distances(g);
        for (const Tensor& p : probs) {
          const std::size_t N = b.max_nodes;
          for (std::size_t k = 0; k < 8; ++k) {
            double row = 0.0;
            for (std::size_t l = 0; l < N; ++l) {
              const double v = p[k * N + l];
              EXPECT_GE(v, 0.0);
              EXPECT_LE(v, 1.0);
              if (l < 8 && (dist[k][l] < 0 || dist[k][l] > r)) EXPECT_LE(v, 1e-12);
              row += v;
            }
            if (map == ScoreMap::softmax) EXPECT_NEAR(row, 1.0, 1e-9);
          }
        }
      }
    }
  }
}

TEST(RouteMHSA, ReducesToPlainAttentionWithoutRoutes) {
  Rng rng(10);
  Fixture fx(small_config(3, ScoreMap::softmax), 16);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g = oracle::random_graph(rng, 6, 0.4);
    BatchedGraphs b = make_batch({g}, 3, false);
    b.routes = Tensor(b.routes.shape());
    Tensor h = random_tensor(rng, {1, 6, fx.d_model});
    Tensor out = fx.run(b, h);
    const auto& c = fx.config;
    const Matrix x = slice(h, 0, 6, fx.d_model);
    for (std::size_t head = 0; head < c.n_heads; ++head) {
      // Route-free reference: softmax(Q K^T / sqrt(d_k + d_r)) V.
      Matrix q = oracle::project(*fx.params.w_query, head, c.d_k, x);
      Matrix k = oracle::project(*fx.params.w_key, head, c.d_k, x);
      Matrix v = oracle::project(*fx.params.w_value, head, c.d_v, x);
      Matrix s = oracle::zeros(6, 6);
      for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t bb = 0; bb < 6; ++bb) {
          for (std::size_t i = 0; i < c.d_k; ++i) s[a][bb] += q[a][i] * k[bb][i];
          s[a][bb] /= std::sqrt(static_cast<double>(c.d_k + c.d_r));
        }
      Matrix a = oracle::softmax_rows(s);
      for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t i = 0; i < c.d_v; ++i) {
          double acc = 0.0;
          for (std::size_t l = 0; l < 6; ++l) acc += a[r][l] * v[l][i];
          EXPECT_NEAR(out[r * c.n_heads * c.d_v + head * c.d_v + i], acc, 1e-12);
        }
    }
  }
}

TEST(RouteMHSA, GradientCheck) {
  Rng rng(11);
  std::vector<Graph> gs{oracle::random_graph(rng, 4, 0.6), oracle::random_graph(rng, 3, 0.7)};
  BatchedGraphs b = make_batch(gs, 2, true);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    for (RouteSchedule sched : {RouteSchedule::factored, RouteSchedule::materialized}) {
      Fixture fx(small_config(2, map, {1}), 17, 4, 2);
      Tensor h = random_tensor(rng, {2, b.max_nodes, 4});
      auto f = [&](Tape& tape, std::span<const Var> v) {
        Var out = route_mhsa(tape, v[0], tape.constant(b.routes), b, fx.params, fx.config, sched);
        return sum(mul(out, tape.constant(Tensor(out.shape(), 0.5))));
      };
      EXPECT_LT(grad_check(f, std::vector<Tensor>{h}).max_rel_error, 1e-6);
    }
  }
}

TEST(RouteMHSA, ParameterGradientCheck) {
  Rng rng(12);
  std::vector<Graph> gs{oracle::random_graph(rng, 4, 0.6), oracle::random_graph(rng, 3, 0.7)};
  BatchedGraphs b = make_batch(gs, 2, true);
  for (ScoreMap map : {ScoreMap::softmax, ScoreMap::sigmoid}) {
    for (RouteSchedule sched : {RouteSchedule::factored, RouteSchedule::materialized}) {
      Fixture fx(small_config(2, map, {1}), 18, 4, 2);
      Tensor h = random_tensor(rng, {2, b.max_nodes, 4});
      auto loss = [&](Tape& tape) {
        Var out = route_mhsa(tape, tape.constant(h), tape.constant(b.routes), b, fx.params, fx.config, sched);
        Tensor weights(out.shape());
        Rng wr(3);
        for (double& e : weights.data()) e = uniform(wr, -1.0, 1.0);
        return sum(mul(out, tape.constant(weights)));
      };
      EXPECT_LT(grad_check_parameters(loss, fx.store.tensors()).max_rel_error, 1e-6);
    }
  }
}

TEST(RouteMHSA, InjectivityOnRegularPair) {
  const auto pair = builtin_graphs("RegN6D3");
  ASSERT_EQ(pair.size(), 2u);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AttentionConfig c = small_config(2, ScoreMap::sigmoid);
    Fixture fx(c, seed, 3, 4);
    std::vector<Tensor> outs;
    std::vector<RouteTensor> routes;
    for (const Graph& g : pair) {
      BatchedGraphs b = make_batch({g}, 4, false);
      routes.push_back(route_histogram(g, 4));
      Tensor h(Shape{1, 6, 3});
      Rng hr(99);
      Tensor row = random_tensor(hr, {3});
      for (std::size_t v = 0; v < 6; ++v)
        for (std::size_t i = 0; i < 3; ++i) h[v * 3 + i] = row[i];  // identical node states
      outs.push_back(fx.run(b, h));
    }
    const std::size_t w = outs[0].shape()[2];
    for (std::size_t v = 0; v < 6; ++v)
      for (std::size_t u = 0; u < 6; ++u) {
        std::vector<std::vector<double>> mv, mu;
        for (std::size_t l = 0; l < 6; ++l) {
          std::vector<double> a, b;
          for (std::size_t f = 0; f < 4; ++f) {
            a.push_back(routes[0].at(v, l, f));
            b.push_back(routes[1].at(u, l, f));
          }
          mv.push_back(a);
          mu.push_back(b);
        }
        std::sort(mv.begin(), mv.end());
        std::sort(mu.begin(), mu.end());
        if (mv == mu) continue;
        double gap = 0.0;
        for (std::size_t i = 0; i < w; ++i) gap = std::max(gap, std::abs(outs[0][v * w + i] - outs[1][u * w + i]));
        EXPECT_GT(gap, 1e-9) << "seed " << seed << " nodes " << v << "," << u;
      }
  }
}

TEST(AttentionConfig, Validation) {
  AttentionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AttentionConfig{};
  c.radii = {1, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c.radii = {-1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.radii = {3};
  EXPECT_EQ(c.radius_of(5), std::optional<int>(3));
  EXPECT_EQ(score_map_from_string("injective"), ScoreMap::sigmoid);
  EXPECT_EQ(score_map_from_string("softmax"), ScoreMap::softmax);
  EXPECT_THROW(score_map_from_string("relu"), ConfigError);
}

TEST(AttentionParams, LookupChecksShapes) {
  AttentionConfig c = small_config(2, ScoreMap::softmax);
  Fixture fx(c, 1);
  EXPECT_NO_THROW(RouteMHSAParams::lookup(fx.store, "attn", c, fx.d_model, fx.f_route));
  EXPECT_THROW(RouteMHSAParams::lookup(fx.store, "attn", c, fx.d_model + 1, fx.f_route), Error);
  EXPECT_THROW(RouteMHSAParams::lookup(fx.store, "other", c, fx.d_model, fx.f_route), Error);
}

TEST(AttentionDump, RowsAndDeterminism) {
  const auto run = [] {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    Graph k3 = Graph::from_edges(3, e);
    Fixture fx(small_config(2, ScoreMap::softmax, {1}), 21);
    BatchedGraphs b = make_batch({k3}, 3, true);
    Rng rng(4);
    Tensor h = random_tensor(rng, {1, b.max_nodes, fx.d_model});
    std::vector<std::vector<Tensor>> layers(1);
    fx.run(b, h, RouteSchedule::factored, &layers[0]);
    return std::make_pair(attention_maps(layers, b), b);
  };
  auto [maps, b] = run();
  ASSERT_EQ(maps.size(), 2u);
  for (const AttentionMap& m : maps) {
    ASSERT_EQ(m.matrix.shape(), (Shape{4, 4}));
    EXPECT_EQ(m.pool_index, std::optional<std::size_t>(3));
    EXPECT_EQ(m.node_labels.size(), 4u);
    for (std::size_t r = 0; r < 4; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < 4; ++c) acc += m.matrix[r * 4 + c];
      EXPECT_NEAR(acc, 1.0, 1e-9);
    }
  }
  EXPECT_EQ(attention_dump_json(maps).dump(), attention_dump_json(run().first).dump());
}

TEST(RouteMHSA, QuadraticScaling) {
  // Wall time of n vs 2n nodes. Small widths keep the pairwise terms dominant.
  AttentionConfig c = small_config(2, ScoreMap::softmax);
  Fixture fx(c, 22, 4, 2);
  const auto time_for = [&](std::size_t n) {
    Rng rng(n);
    Graph g = oracle::random_graph(rng, n, 4.0 / static_cast<double>(n));
    std::vector<Graph> gs{g};
    std::vector<RouteTensor> rs{RouteTensor(random_tensor(rng, {n, n, 2}))};
    BatchedGraphs b = batch(gs, rs, false);
    Tensor h = random_tensor(rng, {1, n, 4});
    double best = 1e30;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      Tape tape;
      Var out = route_mhsa(tape, tape.constant(h), tape.constant(b.routes), b, fx.params, fx.config);
      tape.backward(sum(out));
      best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
  };
  const double ratio = time_for(400) / time_for(200);
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 6.0);
  RecordProperty("ratio", std::to_string(ratio));
}

}  // namespace
}  // namespace gi
