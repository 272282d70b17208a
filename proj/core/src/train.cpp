// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/train.hpp"

#include <cmath>
#include <numeric>

#include "graphinformer/adam.hpp"
#include "graphinformer/errors.hpp"
#include "graphinformer/losses.hpp"
#include "graphinformer/metrics.hpp"

namespace gi {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) throw ConfigError("learning-rate decay factor must lie in (0, 1)");
  if (routes.histogram_k == 0) throw ConfigError("route histogram length must be at least 1");
  if (routes.distance_bins) routes.distance_bins->validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"learning_rate", learning_rate},
          {"decay_epochs", decay_epochs},
          {"decay_factor", decay_factor},
          {"batch_size", batch_size},
          {"metric", metric == StopMetric::mae ? "mae" : "auc"},
          {"seed", seed},
          {"routes", route_config_to_json(routes)},
          {"zero_routes", zero_routes},
          {"standardize_targets", standardize_targets}};
}

double learning_rate_at(const TrainConfig& config, std::size_t epoch) {
  double lr = config.learning_rate;
  for (std::size_t d : config.decay_epochs) {
    if (epoch >= d) lr *= config.decay_factor;
  }
  return lr;
}

namespace {

/// Per-task affine map: standardized = (raw - shift) / scale.
struct TaskAffine {
  std::vector<double> shift;
  std::vector<double> scale;
};

bool is_node_task(const Dataset& d) { return d.task == TaskType::node_regression; }

LabeledBatch build_batch(const Dataset& data, const std::vector<RouteTensor>& routes,
                         std::span<const std::size_t> ids, bool pool, const TaskAffine* standardize) {
  std::vector<Graph> graphs;
  std::vector<RouteTensor> r;
  graphs.reserve(ids.size());
  r.reserve(ids.size());
  for (std::size_t id : ids) {
    graphs.push_back(data.samples.at(id).graph);
    r.push_back(routes[id]);
  }
  LabeledBatch out;
  out.graphs = batch(graphs, r, pool);
  out.sample_ids.assign(ids.begin(), ids.end());
  const std::size_t B = ids.size(), N = out.graphs.max_nodes, T = data.n_tasks;
  auto transform = [&](double v, std::size_t task) {
    return standardize ? (v - standardize->shift[task]) / standardize->scale[task] : v;
  };
  if (is_node_task(data)) {
    out.targets = Tensor(Shape{B, N, T});
    out.mask = Tensor(Shape{B, N, T});
    for (std::size_t b = 0; b < B; ++b) {
      const Sample& s = data.samples[ids[b]];
      for (std::size_t v = 0; v < s.graph.size(); ++v) {
        for (std::size_t t = 0; t < T; ++t) {
          const std::size_t dst = (b * N + v) * T + t, src = v * T + t;
          out.mask[dst] = s.mask[src] != 0.0 ? 1.0 : 0.0;
          out.targets[dst] = out.mask[dst] != 0.0 ? transform(s.targets[src], t) : 0.0;
        }
      }
    }
  } else {
    out.targets = Tensor(Shape{B, T});
    out.mask = Tensor(Shape{B, T});
    for (std::size_t b = 0; b < B; ++b) {
      const Sample& s = data.samples[ids[b]];
      for (std::size_t t = 0; t < T; ++t) {
        out.mask[b * T + t] = s.mask[t] != 0.0 ? 1.0 : 0.0;
        out.targets[b * T + t] = out.mask[b * T + t] != 0.0 ? s.targets[t] : 0.0;
      }
    }
  }
  return out;
}

Var batch_loss(const Dataset& data, Var pred, const LabeledBatch& b) {
  return is_node_task(data) ? masked_mae(pred, b.targets, b.mask) : masked_cross_entropy(pred, b.targets, b.mask);
}

Evaluation evaluate_impl(InformerModel& model, const Dataset& data, const std::vector<RouteTensor>& routes,
                         std::size_t batch_size, const TaskAffine* output) {
  const std::size_t T = data.n_tasks;
  Evaluation ev;
  double abs_total = 0.0, loss_total = 0.0;
  std::size_t observed = 0;
  std::vector<std::vector<double>> scores(T);
  std::vector<std::vector<int>> labels(T);
  std::vector<std::size_t> ids(data.size());
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t start = 0; start < ids.size(); start += batch_size) {
    const std::size_t end = std::min(ids.size(), start + batch_size);
    const std::span<const std::size_t> chunk(ids.data() + start, end - start);
    LabeledBatch b = build_batch(data, routes, chunk, model.config().pool, nullptr);
    Tape tape;
    Var pred = model.predict(tape, b.graphs);
    Tensor p = pred.value();
    if (output) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = p[i] * output->scale[i % T] + output->shift[i % T];
    }
    std::size_t batch_observed = 0;
    for (std::size_t i = 0; i < b.mask.size(); ++i) batch_observed += b.mask[i] != 0.0;
    if (batch_observed > 0) {
      Tape loss_tape;
      Var loss = batch_loss(data, loss_tape.constant(p), b);
      loss_total += loss.value()[0] * static_cast<double>(batch_observed);
    }
    const std::size_t N = b.graphs.max_nodes;
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      const Sample& s = data.samples[chunk[j]];
      if (is_node_task(data)) {
        const std::size_t n = s.graph.size();
        Tensor out(Shape{n, T});
        for (std::size_t v = 0; v < n; ++v) {
          for (std::size_t t = 0; t < T; ++t) {
            out[v * T + t] = p[(j * N + v) * T + t];
            if (s.mask[v * T + t] != 0.0) {
              abs_total += std::abs(out[v * T + t] - s.targets[v * T + t]);
              ++observed;
            }
          }
        }
        ev.predictions.push_back(std::move(out));
      } else {
        Tensor out(Shape{T});
        for (std::size_t t = 0; t < T; ++t) {
          out[t] = p[j * T + t];
          if (s.mask[t] != 0.0) {
            scores[t].push_back(out[t]);
            labels[t].push_back(s.targets[t] != 0.0 ? 1 : 0);
            ++observed;
          }
        }
        ev.predictions.push_back(std::move(out));
      }
    }
  }
  if (observed > 0) ev.loss = loss_total / static_cast<double>(observed);
  if (is_node_task(data)) {
    if (observed > 0) ev.mae = abs_total / static_cast<double>(observed);
  } else {
    std::vector<std::optional<double>> per_task;
    for (std::size_t t = 0; t < T; ++t) per_task.push_back(auc_roc(scores[t], labels[t]));
    ev.auc = mean_auc(per_task);
  }
  return ev;
}

std::vector<RouteTensor> compute_routes(const Dataset& data, const TrainConfig& config) {
  std::vector<RouteTensor> out;
  out.reserve(data.size());
  for (const Sample& s : data.samples) {
    RouteTensor r = route_features(s.graph, config.routes);
    if (config.zero_routes) r.values().fill(0.0);
    out.push_back(std::move(r));
  }
  return out;
}

TaskAffine target_statistics(const Dataset& data) {
  const std::size_t T = data.n_tasks;
  TaskAffine a{std::vector<double>(T, 0.0), std::vector<double>(T, 1.0)};
  std::vector<double> sum(T, 0.0), sq(T, 0.0);
  std::vector<std::size_t> count(T, 0);
  for (const Sample& s : data.samples) {
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      if (s.mask[i] == 0.0) continue;
      sum[i % T] += s.targets[i];
      sq[i % T] += s.targets[i] * s.targets[i];
      ++count[i % T];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (count[t] == 0) continue;
    const double mean = sum[t] / static_cast<double>(count[t]);
    const double var = sq[t] / static_cast<double>(count[t]) - mean * mean;
    a.shift[t] = mean;
    a.scale[t] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  return a;
}

void fold_output_transform(InformerModel& model, const TaskAffine& a) {
  Tensor& w2 = model.parameters().at("head.w2");
  Tensor& b2 = model.parameters().at("head.b2");
  const std::size_t T = w2.shape()[0], width = w2.shape()[1];
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < width; ++j) w2[t * width + j] *= a.scale[t];
    b2[t] = b2[t] * a.scale[t] + a.shift[t];
  }
}

bool improves(StopMetric m, const std::optional<double>& candidate, const std::optional<double>& best) {
  if (!candidate) return false;
  if (!best) return true;
  return m == StopMetric::mae ? *candidate < *best : *candidate > *best;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

PreparedDataset::PreparedDataset(const Dataset& data, const TrainConfig& config)
    : data_(&data), routes_(compute_routes(data, config)) {}

LabeledBatch PreparedDataset::make_batch(std::span<const std::size_t> ids, bool pool) const {
  return build_batch(*data_, routes_, ids, pool, nullptr);
}

Evaluation evaluate(InformerModel& model, const PreparedDataset& data, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  return evaluate_impl(model, data.data(), data.routes(), batch_size, nullptr);
}

nlohmann::json TrainResult::to_json() const {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& r : history) {
    epochs.push_back({{"epoch", r.epoch},
                      {"learning_rate", r.learning_rate},
                      {"train_loss", r.train_loss},
                      {"train_metric", optional_json(r.train_metric)},
                      {"val_metric", optional_json(r.val_metric)}});
  }
  return {{"epochs", epochs},
          {"best_epoch", best_epoch},
          {"best_val_metric", optional_json(best_val_metric)},
          {"best_train_metric", optional_json(best_train_metric)}};
}

TrainResult train(InformerModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config) {
  config.validate();
  train_set.validate();
  val_set.validate();
  if (train_set.size() == 0) throw ConfigError("training set is empty");
  const bool node_task = is_node_task(train_set);
  if (val_set.task != train_set.task || val_set.n_tasks != train_set.n_tasks) {
    throw ConfigError("training and validation sets describe different tasks");
  }
  const HeadType expected = node_task ? HeadType::node_regression : HeadType::graph_classification;
  if (model.config().head != expected || model.config().n_tasks != train_set.n_tasks) {
    throw ConfigError("model head (" + to_string(model.config().head) + ", " +
                      std::to_string(model.config().n_tasks) + " tasks) does not fit the " +
                      to_string(train_set.task) + " dataset");
  }
  if (model.config().f_route != config.routes.feature_count()) {
    throw ConfigError("model expects " + std::to_string(model.config().f_route) + " route features, route config gives " +
                      std::to_string(config.routes.feature_count()));
  }

  const std::vector<RouteTensor> train_routes = compute_routes(train_set, config);
  const std::vector<RouteTensor> val_routes = compute_routes(val_set, config);
  const std::optional<TaskAffine> affine =
      node_task && config.standardize_targets ? std::optional<TaskAffine>(target_statistics(train_set)) : std::nullopt;
  const TaskAffine* affine_ptr = affine ? &*affine : nullptr;
  const std::size_t eval_batch = std::max<std::size_t>(config.batch_size, 64);

  ParameterStore& params = model.parameters();
  std::vector<Tensor*> tensors = params.tensors();
  std::vector<const Tensor*> const_tensors(tensors.begin(), tensors.end());
  AdamState adam = AdamState::for_parameters(const_tensors, AdamOptions{config.learning_rate});

  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  ParameterStore best = params;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = learning_rate_at(config, epoch);
    adam.options.learning_rate = rec.learning_rate;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(shuffle_rng, 0, static_cast<std::int64_t>(i - 1)))]);
    }
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batches) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> ids(order.data() + start, end - start);
      LabeledBatch b = build_batch(train_set, train_routes, ids, model.config().pool, affine_ptr);
      try {
        Tape tape;
        ForwardOptions fwd{true, &dropout_rng, nullptr};
        Var loss = batch_loss(train_set, model.predict(tape, b.graphs, fwd), b);
        params.zero_grad();
        tape.backward(loss);
        adam_step(tensors, adam);
        loss_sum += loss.value()[0];
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches) + ": " + e.what());
      }
    }
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.val_metric = evaluate_impl(model, val_set, val_routes, eval_batch, affine_ptr).metric(config.metric);
    if (config.eval_train_every_epoch || epoch + 1 == config.epochs) {
      rec.train_metric = evaluate_impl(model, train_set, train_routes, eval_batch, affine_ptr).metric(config.metric);
    }
    if (epoch == 0 || improves(config.metric, rec.val_metric, result.best_val_metric)) {
      result.best_epoch = epoch;
      result.best_val_metric = rec.val_metric;
      best.assign(params);
    }
    result.history.push_back(rec);
  }

  params.assign(best);
  if (affine_ptr) fold_output_transform(model, *affine_ptr);
  result.best_train_metric = evaluate_impl(model, train_set, train_routes, eval_batch, nullptr).metric(config.metric);
  result.checkpoint = model.checkpoint();
  result.checkpoint["routes"] = route_config_to_json(config.routes);
  result.checkpoint["zero_routes"] = config.zero_routes;
  return result;
}

Var dataset_loss(Tape& tape, InformerModel& model, const PreparedDataset& data) {
  std::vector<std::size_t> ids(data.size());
  std::iota(ids.begin(), ids.end(), 0);
  const LabeledBatch b = data.make_batch(ids, model.config().pool);
  return batch_loss(data.data(), model.predict(tape, b.graphs), b);
}

GradCheckResult model_grad_check(InformerModel& model, const PreparedDataset& data, double h) {
  std::vector<Tensor*> params = model.parameters().tensors();
  return grad_check_parameters([&](Tape& tape) { return dataset_loss(tape, model, data); }, params, h);
}

}  // namespace gi
