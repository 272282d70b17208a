// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/informer.hpp"

#include <utility>

#include "graphinformer/errors.hpp"

namespace gi {

std::string to_string(HeadType head) {
  return head == HeadType::node_regression ? "node_regression" : "graph_classification";
}

std::string to_string(NormStyle style) { return style == NormStyle::residual ? "residual" : "post_norm"; }

namespace {

HeadType head_from_string(const std::string& s) {
  if (s == "node_regression") return HeadType::node_regression;
  if (s == "graph_classification") return HeadType::graph_classification;
  throw ConfigError("unknown head type '" + s + "'");
}

NormStyle norm_from_string(const std::string& s) {
  if (s == "residual") return NormStyle::residual;
  if (s == "post_norm") return NormStyle::post_norm;
  throw ConfigError("unknown norm style '" + s + "'");
}

std::string layer_prefix(std::size_t layer) { return "layer" + std::to_string(layer); }

Tensor ones(std::size_t n) { return Tensor(Shape{n}, 1.0); }

}  // namespace

void InformerConfig::validate() const {
  if (n_layers == 0) throw ConfigError("n_layers must be at least 1");
  if (d_hidden == 0 || f_route == 0 || f_nodes == 0 || n_tasks == 0) {
    throw ConfigError("d_hidden, f_route, f_nodes and n_tasks must be at least 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  attention.validate();
}

nlohmann::json InformerConfig::to_json() const {
  nlohmann::json radii = nlohmann::json::array();
  for (const auto& r : attention.radii) radii.push_back(r ? nlohmann::json(*r) : nlohmann::json(nullptr));
  return {{"n_layers", n_layers},
          {"d_hidden", d_hidden},
          {"n_heads", attention.n_heads},
          {"d_k", attention.d_k},
          {"d_v", attention.d_v},
          {"d_r", attention.d_r},
          {"score_map", to_string(attention.score_map)},
          {"radii", radii},
          {"f_route", f_route},
          {"f_nodes", f_nodes},
          {"d_ffn", d_ffn},
          {"d_head", d_head},
          {"dropout", dropout},
          {"dropout_mode", dropout_mode == DropoutMode::element ? "element" : "channel"},
          {"head", to_string(head)},
          {"n_tasks", n_tasks},
          {"pool", pool},
          {"norm", to_string(norm)},
          {"schedule", schedule == RouteSchedule::factored ? "factored" : "materialized"}};
}

InformerConfig InformerConfig::from_json(const nlohmann::json& doc) {
  try {
    InformerConfig c;
    c.n_layers = doc.at("n_layers").get<std::size_t>();
    c.d_hidden = doc.at("d_hidden").get<std::size_t>();
    c.attention.n_heads = doc.at("n_heads").get<std::size_t>();
    c.attention.d_k = doc.at("d_k").get<std::size_t>();
    c.attention.d_v = doc.at("d_v").get<std::size_t>();
    c.attention.d_r = doc.at("d_r").get<std::size_t>();
    c.attention.score_map = score_map_from_string(doc.at("score_map").get<std::string>());
    for (const auto& r : doc.at("radii")) {
      c.attention.radii.push_back(r.is_null() ? std::nullopt : std::optional<int>(r.get<int>()));
    }
    c.f_route = doc.at("f_route").get<std::size_t>();
    c.f_nodes = doc.at("f_nodes").get<std::size_t>();
    c.d_ffn = doc.value("d_ffn", std::size_t{0});
    c.d_head = doc.value("d_head", std::size_t{0});
    c.dropout = doc.value("dropout", 0.0);
    const std::string mode = doc.value("dropout_mode", std::string("element"));
    if (mode != "element" && mode != "channel") throw ConfigError("unknown dropout mode '" + mode + "'");
    c.dropout_mode = mode == "element" ? DropoutMode::element : DropoutMode::channel;
    c.head = head_from_string(doc.at("head").get<std::string>());
    c.n_tasks = doc.at("n_tasks").get<std::size_t>();
    c.pool = doc.value("pool", true);
    c.norm = norm_from_string(doc.value("norm", std::string("residual")));
    const std::string schedule = doc.value("schedule", std::string("factored"));
    if (schedule != "factored" && schedule != "materialized") {
      throw ConfigError("unknown route schedule '" + schedule + "'");
    }
    c.schedule = schedule == "factored" ? RouteSchedule::factored : RouteSchedule::materialized;
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
}

InformerModel::InformerModel(InformerConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  const InformerConfig& c = config_;
  const std::size_t d = c.d_hidden, heads_out = c.attention.n_heads * c.attention.d_v;
  const std::size_t ffn = c.ffn_width(), dh = c.head_width();

  params_.add("input.weight", uniform_init({d, c.f_nodes}, c.f_nodes, rng));
  if (c.pool) params_.add("pool.embedding", uniform_init({d}, 1, rng));
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = layer_prefix(i);
    RouteMHSAParams::create(params_, p + ".attn", c.attention, d, c.f_route, rng);
    params_.add(p + ".out.weight", uniform_init({d, heads_out}, heads_out, rng));
    params_.add(p + ".out.bias", uniform_init({d}, heads_out, rng));
    params_.add(p + ".norm1.gamma", ones(d));
    params_.add(p + ".norm1.beta", Tensor(Shape{d}));
    params_.add(p + ".ffn.w1", uniform_init({ffn, d}, d, rng));
    params_.add(p + ".ffn.b1", uniform_init({ffn}, d, rng));
    params_.add(p + ".ffn.w2", uniform_init({d, ffn}, ffn, rng));
    params_.add(p + ".ffn.b2", uniform_init({d}, ffn, rng));
    params_.add(p + ".norm2.gamma", ones(d));
    params_.add(p + ".norm2.beta", Tensor(Shape{d}));
  }
  params_.add("head.w1", uniform_init({dh, d}, d, rng));
  params_.add("head.b1", uniform_init({dh}, d, rng));
  params_.add("head.w2", uniform_init({c.n_tasks, dh}, dh, rng));
  params_.add("head.b2", uniform_init({c.n_tasks}, dh, rng));
}

InformerModel::InformerModel(InformerConfig config, ParameterStore params)
    : config_(std::move(config)), params_(std::move(params)) {}

Var InformerModel::param(Tape& tape, const std::string& name) { return tape.watch(params_.at(name)); }

RouteMHSAParams InformerModel::attention_params(std::size_t layer) {
  return RouteMHSAParams::lookup(params_, layer_prefix(layer) + ".attn", config_.attention, config_.d_hidden,
                                 config_.f_route);
}

Var InformerModel::embed_inputs(Tape& tape, const BatchedGraphs& batch) {
  if (batch.node_feature_dim != config_.f_nodes) {
    throw DimensionError("node features have dimension " + std::to_string(batch.node_feature_dim) +
                         ", model expects " + std::to_string(config_.f_nodes));
  }
  if (batch.has_pool != config_.pool) {
    throw ConfigError(config_.pool ? "model expects a pool slot in the batch" : "model has no pool embedding");
  }
  // Padded and pool slots carry zero features, so their projection is zero.
  Var h = linear(tape.constant(batch.node_features), param(tape, "input.weight"));
  if (config_.pool) h = add(h, place_rows(param(tape, "pool.embedding"), batch.pool_indicator()));
  return h;
}

Var InformerModel::layer_forward(Tape& tape, std::size_t layer, Var h, Var routes, const BatchedGraphs& batch,
                                 const ForwardOptions& options) {
  if (layer >= config_.n_layers) throw ConfigError("layer index " + std::to_string(layer) + " out of range");
  const double rate = options.training ? config_.dropout : 0.0;
  Rng fallback(0);
  if (rate > 0.0 && options.rng == nullptr) throw ConfigError("training with dropout needs a random generator");
  Rng& rng = options.rng ? *options.rng : fallback;
  const std::string p = layer_prefix(layer);

  std::vector<Tensor> probs;
  Var attn = route_mhsa(tape, h, routes, batch, attention_params(layer), config_.attention, config_.schedule,
                        options.attention ? &probs : nullptr);
  if (options.attention) options.attention->push_back(std::move(probs));

  Var mixed = linear(attn, param(tape, p + ".out.weight"), param(tape, p + ".out.bias"));
  mixed = dropout(mixed, rate, config_.dropout_mode, options.training, rng);
  Var gamma1 = param(tape, p + ".norm1.gamma"), beta1 = param(tape, p + ".norm1.beta");
  Var t = config_.norm == NormStyle::residual ? add(h, layer_norm(mixed, gamma1, beta1))
                                              : layer_norm(add(h, mixed), gamma1, beta1);

  Var inner = relu(linear(t, param(tape, p + ".ffn.w1"), param(tape, p + ".ffn.b1")));
  Var ffn = linear(inner, param(tape, p + ".ffn.w2"), param(tape, p + ".ffn.b2"));
  ffn = dropout(ffn, rate, config_.dropout_mode, options.training, rng);
  Var gamma2 = param(tape, p + ".norm2.gamma"), beta2 = param(tape, p + ".norm2.beta");
  return config_.norm == NormStyle::residual ? add(t, layer_norm(ffn, gamma2, beta2))
                                             : layer_norm(add(t, ffn), gamma2, beta2);
}

Var InformerModel::encode(Tape& tape, const BatchedGraphs& batch, const ForwardOptions& options) {
  if (batch.route_feature_dim != config_.f_route) {
    throw DimensionError("route features have dimension " + std::to_string(batch.route_feature_dim) +
                         ", model expects " + std::to_string(config_.f_route));
  }
  Var h = embed_inputs(tape, batch);
  Var routes = tape.constant(batch.routes);
  for (std::size_t i = 0; i < config_.n_layers; ++i) h = layer_forward(tape, i, h, routes, batch, options);
  return h;
}

Var InformerModel::node_head(Tape& tape, Var h) {
  Var hidden = tanh(linear(h, param(tape, "head.w1"), param(tape, "head.b1")));
  return linear(hidden, param(tape, "head.w2"), param(tape, "head.b2"));
}

Var InformerModel::graph_head(Tape& tape, Var h, const BatchedGraphs& batch) {
  Var hidden = relu(linear(h, param(tape, "head.w1"), param(tape, "head.b1")));
  Tensor weights = batch.real_node_indicator();
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    const double inv = 1.0 / static_cast<double>(batch.node_counts[b]);
    for (std::size_t n = 0; n < batch.max_nodes; ++n) weights[b * batch.max_nodes + n] *= inv;
  }
  Var pooled = node_weighted_sum(hidden, weights);
  return linear(pooled, param(tape, "head.w2"), param(tape, "head.b2"));
}

Var InformerModel::predict(Tape& tape, const BatchedGraphs& batch, const ForwardOptions& options) {
  Var h = encode(tape, batch, options);
  return config_.head == HeadType::node_regression ? node_head(tape, h) : graph_head(tape, h, batch);
}

nlohmann::json InformerModel::checkpoint() const {
  return {{"format", "graphinformer-checkpoint"},
          {"version", kCheckpointVersion},
          {"config", config_.to_json()},
          {"parameters", params_.to_json()}};
}

InformerModel InformerModel::from_checkpoint(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("version")) throw ParseError("checkpoint: missing version field");
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + doc["version"].dump());
  }
  if (!doc.contains("config") || !doc.contains("parameters")) {
    throw ParseError("checkpoint: expected 'config' and 'parameters'");
  }
  InformerConfig config = InformerConfig::from_json(doc["config"]);
  // A freshly initialized model fixes the expected names and shapes.
  InformerModel model(config, 0);
  try {
    model.params_.assign(ParameterStore::from_json(doc["parameters"]));
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

Var sum_readout(Var h, const BatchedGraphs& batch) { return node_weighted_sum(h, batch.real_node_indicator()); }

}  // namespace gi
