// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/attention.hpp"

#include <cmath>
#include <map>

#include "graphinformer/errors.hpp"

namespace gi {

std::string to_string(ScoreMap map) { return map == ScoreMap::softmax ? "softmax" : "sigmoid"; }

ScoreMap score_map_from_string(const std::string& name) {
  if (name == "softmax") return ScoreMap::softmax;
  if (name == "sigmoid" || name == "injective") return ScoreMap::sigmoid;
  throw ConfigError("unknown score map '" + name + "' (expected softmax or sigmoid)");
}

std::optional<int> AttentionConfig::radius_of(std::size_t head) const {
  if (radii.empty()) return std::nullopt;
  if (radii.size() == 1) return radii[0];
  return radii.at(head);
}

void AttentionConfig::validate() const {
  if (n_heads == 0 || d_k == 0 || d_v == 0 || d_r == 0) {
    throw ConfigError("attention needs n_heads, d_k, d_v, d_r >= 1");
  }
  if (radii.size() > 1 && radii.size() != n_heads) {
    throw ConfigError("attention radii: expected 1 or " + std::to_string(n_heads) + " entries, got " +
                      std::to_string(radii.size()));
  }
  for (const auto& r : radii) {
    if (r && *r < 0) throw ConfigError("attention radius must be non-negative");
  }
}

namespace {

void check_shape(const Tensor& t, const Shape& expected, const std::string& name) {
  if (t.shape() != expected) {
    throw ConfigError("parameter " + name + " has shape " + shape_string(t.shape()) + ", expected " +
                      shape_string(expected));
  }
}

struct ParamShapes {
  Shape query, key, value, route_query, route_key, route_value;
};

ParamShapes param_shapes(const AttentionConfig& c, std::size_t d, std::size_t f) {
  const std::size_t H = c.n_heads;
  return {{H * c.d_k, d}, {H * c.d_k, d}, {H * c.d_v, d}, {H * c.d_r, d}, {H * c.d_r, f}, {H * c.d_v, f}};
}

Var combine_scores(Var node_term, Var route_term, std::size_t d_k, std::size_t d_r, const Tensor& mask) {
  Var s = scale(add(node_term, route_term), 1.0 / std::sqrt(static_cast<double>(d_k + d_r)));
  return add_constant(s, mask);
}

}  // namespace

RouteMHSAParams RouteMHSAParams::create(ParameterStore& store, const std::string& prefix,
                                        const AttentionConfig& config, std::size_t d_model, std::size_t f_route,
                                        Rng& rng) {
  config.validate();
  const ParamShapes s = param_shapes(config, d_model, f_route);
  RouteMHSAParams p;
  p.w_query = &store.add(prefix + ".w_query", uniform_init(s.query, d_model, rng));
  p.w_key = &store.add(prefix + ".w_key", uniform_init(s.key, d_model, rng));
  p.w_value = &store.add(prefix + ".w_value", uniform_init(s.value, d_model, rng));
  p.w_route_query = &store.add(prefix + ".w_route_query", uniform_init(s.route_query, d_model, rng));
  p.w_route_key = &store.add(prefix + ".w_route_key", uniform_init(s.route_key, f_route, rng));
  p.w_route_value = &store.add(prefix + ".w_route_value", uniform_init(s.route_value, f_route, rng));
  return p;
}

RouteMHSAParams RouteMHSAParams::lookup(ParameterStore& store, const std::string& prefix,
                                        const AttentionConfig& config, std::size_t d_model, std::size_t f_route) {
  config.validate();
  const ParamShapes s = param_shapes(config, d_model, f_route);
  RouteMHSAParams p;
  p.w_query = &store.at(prefix + ".w_query");
  p.w_key = &store.at(prefix + ".w_key");
  p.w_value = &store.at(prefix + ".w_value");
  p.w_route_query = &store.at(prefix + ".w_route_query");
  p.w_route_key = &store.at(prefix + ".w_route_key");
  p.w_route_value = &store.at(prefix + ".w_route_value");
  check_shape(*p.w_query, s.query, prefix + ".w_query");
  check_shape(*p.w_key, s.key, prefix + ".w_key");
  check_shape(*p.w_value, s.value, prefix + ".w_value");
  check_shape(*p.w_route_query, s.route_query, prefix + ".w_route_query");
  check_shape(*p.w_route_key, s.route_key, prefix + ".w_route_key");
  check_shape(*p.w_route_value, s.route_value, prefix + ".w_route_value");
  return p;
}

Var route_scores(Var q, Var k, Var q_route, Var k_route, const Tensor& mask) {
  if (q.shape().size() != 3 || q_route.shape().size() != 3) {
    throw DimensionError("route_scores: Q " + shape_string(q.shape()) + " and Q_R " + shape_string(q_route.shape()) +
                         " must be [G,N,d]");
  }
  if (k.shape() != q.shape()) {
    throw DimensionError("route_scores: K " + shape_string(k.shape()) + " differs from Q " + shape_string(q.shape()));
  }
  const std::size_t d_k = q.shape()[2], d_r = q_route.shape()[2];
  return combine_scores(bmm_nt(q, k), pair_contract(q_route, k_route), d_k, d_r, mask);
}

Var attention_probs(Var scores, ScoreMap map) {
  return map == ScoreMap::softmax ? softmax_rows(scores, true) : sigmoid(scores);
}

Var route_attn(Var a, Var v, Var v_route) {
  if (v.shape().size() != 3 || a.shape().size() != 3 || v.shape()[0] != a.shape()[0]) {
    throw DimensionError("route_attn: A " + shape_string(a.shape()) + " incompatible with V " +
                         shape_string(v.shape()));
  }
  return add(bmm(a, v), pair_aggregate(a, v_route));
}

Var route_mhsa(Tape& tape, Var h, Var routes, const BatchedGraphs& batch, const RouteMHSAParams& params,
               const AttentionConfig& config, RouteSchedule schedule, std::vector<Tensor>* probs) {
  config.validate();
  const std::size_t H = config.n_heads;
  const std::size_t B = batch.batch_size, N = batch.max_nodes, F = batch.route_feature_dim;
  if (h.shape().size() != 3 || h.shape()[0] != B || h.shape()[1] != N) {
    throw DimensionError("route_mhsa: hidden states " + shape_string(h.shape()) + " do not match batch [" +
                         std::to_string(B) + "x" + std::to_string(N) + "xd]");
  }
  if (routes.shape() != Shape{B, N, N, F}) {
    throw DimensionError("route_mhsa: route tensor " + shape_string(routes.shape()) + " does not match batch");
  }
  const std::size_t d_model = h.shape()[2];
  const ParamShapes s = param_shapes(config, d_model, F);
  check_shape(*params.w_query, s.query, "w_query");
  check_shape(*params.w_key, s.key, "w_key");
  check_shape(*params.w_value, s.value, "w_value");
  check_shape(*params.w_route_query, s.route_query, "w_route_query");
  check_shape(*params.w_route_key, s.route_key, "w_route_key");
  check_shape(*params.w_route_value, s.route_value, "w_route_value");

  // Per-head additive masks stacked as [B*H, N, N].
  std::map<std::optional<int>, Tensor> by_radius;
  Tensor mask(Shape{B * H, N, N});
  for (std::size_t head = 0; head < H; ++head) {
    const auto radius = config.radius_of(head);
    auto it = by_radius.find(radius);
    if (it == by_radius.end()) it = by_radius.emplace(radius, batch.attention_mask(radius)).first;
    const Tensor& m = it->second;
    for (std::size_t b = 0; b < B; ++b) {
      std::copy(m.data().begin() + static_cast<std::ptrdiff_t>(b * N * N),
                m.data().begin() + static_cast<std::ptrdiff_t>((b + 1) * N * N),
                mask.data().begin() + static_cast<std::ptrdiff_t>((b * H + head) * N * N));
    }
  }

  Var wq = tape.watch(*params.w_query);
  Var wk = tape.watch(*params.w_key);
  Var wv = tape.watch(*params.w_value);
  Var wqr = tape.watch(*params.w_route_query);
  Var wkr = tape.watch(*params.w_route_key);
  Var wvr = tape.watch(*params.w_route_value);

  Var q = split_heads(linear(h, wq), H);
  Var k = split_heads(linear(h, wk), H);
  Var v = split_heads(linear(h, wv), H);
  Var qr = split_heads(linear(h, wqr), H);

  Var out;
  if (schedule == RouteSchedule::materialized) {
    Var kr = split_heads(linear(routes, wkr), H);
    Var vr = split_heads(linear(routes, wvr), H);
    Var a = attention_probs(route_scores(q, k, qr, kr, mask), config.score_map);
    if (probs) probs->push_back(a.value());
    out = route_attn(a, v, vr);
  } else {
    // Q_R[k] . (W_K^route P[k,l]) == (Q_R[k] W_K^route) . P[k,l]
    Var wkr_t = transpose_last2(reshape(wkr, Shape{H, config.d_r, F}));
    Var folded_query = grouped_linear(qr, wkr_t);
    Var scores = combine_scores(bmm_nt(q, k), pair_contract(folded_query, routes), config.d_k, config.d_r, mask);
    Var a = attention_probs(scores, config.score_map);
    if (probs) probs->push_back(a.value());
    // sum_l A[k,l] W_V^route P[k,l] == W_V^route (sum_l A[k,l] P[k,l])
    Var route_values = grouped_linear(pair_aggregate(a, routes), reshape(wvr, Shape{H, config.d_v, F}));
    out = add(bmm(a, v), route_values);
  }

  if (probs) {
    // Split the stacked [B*H,N,N] probabilities into one [B,N,N] per head.
    Tensor stacked = std::move(probs->back());
    probs->pop_back();
    for (std::size_t head = 0; head < H; ++head) {
      Tensor per_head(Shape{B, N, N});
      for (std::size_t b = 0; b < B; ++b) {
        std::copy(stacked.data().begin() + static_cast<std::ptrdiff_t>((b * H + head) * N * N),
                  stacked.data().begin() + static_cast<std::ptrdiff_t>((b * H + head + 1) * N * N),
                  per_head.data().begin() + static_cast<std::ptrdiff_t>(b * N * N));
      }
      probs->push_back(std::move(per_head));
    }
  }
  return merge_heads(out, H);
}

std::vector<AttentionMap> attention_maps(const std::vector<std::vector<Tensor>>& per_layer_probs,
                                         const BatchedGraphs& batch) {
  std::vector<AttentionMap> maps;
  const std::size_t N = batch.max_nodes;
  for (std::size_t layer = 0; layer < per_layer_probs.size(); ++layer) {
    for (std::size_t head = 0; head < per_layer_probs[layer].size(); ++head) {
      const Tensor& a = per_layer_probs[layer][head];
      for (std::size_t b = 0; b < batch.batch_size; ++b) {
        std::vector<std::size_t> slots;
        AttentionMap map;
        map.layer = layer;
        map.head = head;
        map.sample = b;
        for (std::size_t v = 0; v < batch.node_counts[b]; ++v) {
          slots.push_back(v);
          map.node_labels.push_back(std::to_string(v));
        }
        if (batch.has_pool) {
          map.pool_index = slots.size();
          slots.push_back(N - 1);
          map.node_labels.emplace_back("pool");
        }
        const std::size_t m = slots.size();
        map.matrix = Tensor(Shape{m, m});
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < m; ++j) map.matrix[i * m + j] = a[(b * N + slots[i]) * N + slots[j]];
        }
        maps.push_back(std::move(map));
      }
    }
  }
  return maps;
}

nlohmann::json attention_dump_json(const std::vector<AttentionMap>& maps) {
  nlohmann::json out = nlohmann::json::array();
  for (const AttentionMap& m : maps) {
    const std::size_t n = m.matrix.rank() == 2 ? m.matrix.shape()[0] : 0;
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) rows[i][j] = m.matrix[i * n + j];
    }
    out.push_back({{"layer", m.layer},
                   {"head", m.head},
                   {"sample", m.sample},
                   {"matrix", rows},
                   {"node_labels", m.node_labels},
                   {"pool_index", m.pool_index ? nlohmann::json(*m.pool_index) : nlohmann::json(nullptr)}});
  }
  return out;
}

}  // namespace gi
