// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/batch.hpp"
#include "graphinformer/ops.hpp"
#include "graphinformer/params.hpp"
#include "graphinformer/random.hpp"
#include "graphinformer/tape.hpp"

namespace gi {

/// Score-to-probability map. `sigmoid` is the injective variant.
enum class ScoreMap { softmax, sigmoid };

std::string to_string(ScoreMap map);
ScoreMap score_map_from_string(const std::string& name);

struct AttentionConfig {
  std::size_t n_heads = 6;
  std::size_t d_k = 8;
  std::size_t d_v = 8;
  std::size_t d_r = 8;
  ScoreMap score_map = ScoreMap::softmax;
  /// Attention-ball radius per head. Empty: unlimited for every head; one
  /// entry: shared by all heads; otherwise one entry per head. nullopt
  /// entries are unlimited.
  std::vector<std::optional<int>> radii;

  std::optional<int> radius_of(std::size_t head) const;
  void validate() const;
};

/// How route keys and values are contracted. Both give the same result.
/// `materialized` builds K_R = W_K^route P and V_R = W_V^route P for every
/// pair; `factored` first folds the route-key weights into the query and
/// aggregates P before the value projection, avoiding the N x N x d tensors.
enum class RouteSchedule { factored, materialized };

/// Stacked per-head projection weights; rows h*d .. (h+1)*d-1 belong to head h.
///   w_query, w_key       [H*d_k, d]
///   w_value              [H*d_v, d]
///   w_route_query        [H*d_r, d]
///   w_route_key          [H*d_r, F_route]
///   w_route_value        [H*d_v, F_route]
struct RouteMHSAParams {
  Tensor* w_query = nullptr;
  Tensor* w_key = nullptr;
  Tensor* w_value = nullptr;
  Tensor* w_route_query = nullptr;
  Tensor* w_route_key = nullptr;
  Tensor* w_route_value = nullptr;

  /// Adds freshly initialized weights named `<prefix>.w_query` etc.
  static RouteMHSAParams create(ParameterStore& store, const std::string& prefix, const AttentionConfig& config,
                                std::size_t d_model, std::size_t f_route, Rng& rng);
  /// Looks up existing weights; shapes are checked against the config.
  static RouteMHSAParams lookup(ParameterStore& store, const std::string& prefix, const AttentionConfig& config,
                                std::size_t d_model, std::size_t f_route);

  std::vector<Tensor*> all() const {
    return {w_query, w_key, w_value, w_route_query, w_route_key, w_route_value};
  }
};

/// S = (Q K^T + Q_R (x) K_R) / sqrt(d_k + d_r) + M with
/// (Q_R (x) K_R)[k,l] = Q_R[k] . K_R[k,l].
/// Shapes: q, k [G,N,d_k]; q_route [G,N,d_r]; k_route [G',N,N,d_r] with G a
/// multiple of G'; mask [G,N,N].
Var route_scores(Var q, Var k, Var q_route, Var k_route, const Tensor& mask);

/// Softmax over rows (fully masked rows give zeros) or elementwise sigmoid.
Var attention_probs(Var scores, ScoreMap map);

/// out[k] = sum_l A[k,l] (V[l] + V_R[k,l]). a [G,N,N]; v [G,N,d_v];
/// v_route [G',N,N,d_v].
Var route_attn(Var a, Var v, Var v_route);

/// Route-based multi-head self-attention over a padded batch.
///
/// `h` is [B,N,d] and `routes` [B,N,N,F_route]; head h attends within
/// config.radius_of(h). Returns [B,N,H*d_v], heads concatenated in index
/// order. When `probs` is given, it receives one [B,N,N] probability tensor
/// per head.
Var route_mhsa(Tape& tape, Var h, Var routes, const BatchedGraphs& batch, const RouteMHSAParams& params,
               const AttentionConfig& config, RouteSchedule schedule = RouteSchedule::factored,
               std::vector<Tensor>* probs = nullptr);

/// One head's attention matrix for one sample, restricted to its real and
/// pool slots. Rows are attending nodes.
struct AttentionMap {
  std::size_t layer = 0;
  std::size_t head = 0;
  std::size_t sample = 0;
  Tensor matrix;
  std::vector<std::string> node_labels;
  std::optional<std::size_t> pool_index;
};

/// Cuts per-layer, per-head [B,N,N] probabilities into per-sample maps.
std::vector<AttentionMap> attention_maps(const std::vector<std::vector<Tensor>>& per_layer_probs,
                                         const BatchedGraphs& batch);

/// JSON array of {layer, head, sample, matrix, node_labels, pool_index}.
nlohmann::json attention_dump_json(const std::vector<AttentionMap>& maps);

}  // namespace gi
