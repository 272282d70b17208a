// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/attention.hpp"
#include "graphinformer/batch.hpp"
#include "graphinformer/ops.hpp"
#include "graphinformer/params.hpp"
#include "graphinformer/random.hpp"
#include "graphinformer/tape.hpp"

namespace gi {

enum class HeadType { node_regression, graph_classification };

/// Block arrangement. `residual` is the supported architecture:
///   T  = H + LayerNorm(Dropout(Linear(RouteMHSA(H))))
///   H' = T + LayerNorm(Dropout(FFN(T)))
/// `post_norm` wraps the residual sums instead and exists only as a negative
/// control: T = LayerNorm(H + ...), H' = LayerNorm(T + ...).
enum class NormStyle { residual, post_norm };

std::string to_string(HeadType head);
std::string to_string(NormStyle style);

struct InformerConfig {
  std::size_t n_layers = 2;
  std::size_t d_hidden = 48;
  AttentionConfig attention;
  std::size_t f_route = 4;
  std::size_t f_nodes = 1;
  /// FFN inner width; 0 means d_hidden.
  std::size_t d_ffn = 0;
  /// Width of the output head's hidden layer; 0 means d_hidden.
  std::size_t d_head = 0;
  double dropout = 0.0;
  DropoutMode dropout_mode = DropoutMode::element;
  HeadType head = HeadType::node_regression;
  std::size_t n_tasks = 1;
  bool pool = true;
  NormStyle norm = NormStyle::residual;
  RouteSchedule schedule = RouteSchedule::factored;

  std::size_t ffn_width() const { return d_ffn == 0 ? d_hidden : d_ffn; }
  std::size_t head_width() const { return d_head == 0 ? d_hidden : d_head; }
  /// Throws ConfigError on empty dimensions, bad dropout, or inconsistent radii.
  void validate() const;

  nlohmann::json to_json() const;
  static InformerConfig from_json(const nlohmann::json& doc);
};

/// Options for one forward pass.
struct ForwardOptions {
  bool training = false;
  /// Dropout randomness; required when training with a nonzero rate.
  Rng* rng = nullptr;
  /// When set, receives per layer the per-head [B,N,N] attention probabilities.
  std::vector<std::vector<Tensor>>* attention = nullptr;
};

/// Graph Informer: input projection, pool embedding, stacked blocks and one
/// output head. Parameters live in a ParameterStore keyed by name:
///
///   input.weight                       [d_hidden, f_nodes]
///   pool.embedding                     [d_hidden]
///   layer<i>.attn.{w_query, ...}       see RouteMHSAParams
///   layer<i>.out.{weight, bias}        [d_hidden, H*d_v], [d_hidden]
///   layer<i>.norm1.{gamma, beta}       [d_hidden]
///   layer<i>.ffn.{w1, b1, w2, b2}
///   layer<i>.norm2.{gamma, beta}
///   head.{w1, b1, w2, b2}
class InformerModel {
 public:
  InformerModel(InformerConfig config, std::uint64_t seed);

  const InformerConfig& config() const noexcept { return config_; }
  ParameterStore& parameters() noexcept { return params_; }
  const ParameterStore& parameters() const noexcept { return params_; }

  /// Real slots: input projection of their features; pool slot: the pool
  /// embedding; padded slots: zeros. Returns [B, N, d_hidden].
  Var embed_inputs(Tape& tape, const BatchedGraphs& batch);
  /// One block; `routes` is the batch route tensor on the same tape.
  Var layer_forward(Tape& tape, std::size_t layer, Var h, Var routes, const BatchedGraphs& batch,
                    const ForwardOptions& options = {});
  /// Embedding followed by all blocks: final hidden states [B, N, d_hidden].
  Var encode(Tape& tape, const BatchedGraphs& batch, const ForwardOptions& options = {});

  /// linear -> tanh -> linear per node slot: [B, N, n_tasks].
  Var node_head(Tape& tape, Var h);
  /// linear -> ReLU per node, mean over real nodes, linear: [B, n_tasks].
  Var graph_head(Tape& tape, Var h, const BatchedGraphs& batch);
  /// encode followed by the configured head.
  Var predict(Tape& tape, const BatchedGraphs& batch, const ForwardOptions& options = {});

  /// {"format", "version", "config", "parameters"}.
  nlohmann::json checkpoint() const;
  /// Throws ParseError on malformed documents and ConfigError on shape mismatch.
  static InformerModel from_checkpoint(const nlohmann::json& doc);

 private:
  InformerModel(InformerConfig config, ParameterStore params);
  Var param(Tape& tape, const std::string& name);
  RouteMHSAParams attention_params(std::size_t layer);

  InformerConfig config_;
  ParameterStore params_;
};

/// Sum of real-node vectors per sample, pool excluded: [B, d].
Var sum_readout(Var h, const BatchedGraphs& batch);

inline constexpr int kCheckpointVersion = 1;

}  // namespace gi
