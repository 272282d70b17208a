// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/batch.hpp"
#include "graphinformer/gradcheck.hpp"
#include "graphinformer/informer.hpp"
#include "graphinformer/routes.hpp"
#include "graphinformer/synth.hpp"

namespace gi {

enum class StopMetric { mae, auc };

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::vector<std::size_t> decay_epochs{40, 70};
  double decay_factor = 0.3;
  std::size_t batch_size = 16;
  StopMetric metric = StopMetric::mae;
  std::uint64_t seed = 0;
  RouteFeatureConfig routes;
  /// Ablation: every route feature is replaced by zero (masks are kept).
  bool zero_routes = false;
  /// Regression only: train on standardized targets and fold the inverse
  /// transform into the output layer afterwards.
  bool standardize_targets = true;
  /// Evaluate the training-set metric after every epoch (otherwise only
  /// after the last one).
  bool eval_train_every_epoch = true;

  /// Throws ConfigError unless epochs >= 1, batch_size >= 1, lr > 0 and
  /// the decay factor lies in (0, 1).
  void validate() const;
  nlohmann::json to_json() const;
};

/// Learning rate for 0-based `epoch`: the base rate multiplied by the decay
/// factor once for every decay epoch <= epoch.
double learning_rate_at(const TrainConfig& config, std::size_t epoch);

/// A padded batch with per-slot (node tasks) or per-graph targets and masks.
struct LabeledBatch {
  BatchedGraphs graphs;
  Tensor targets;  ///< [B, N, T] or [B, T]
  Tensor mask;
  std::vector<std::size_t> sample_ids;
};

/// Dataset with route tensors computed once. The dataset must outlive it.
class PreparedDataset {
 public:
  PreparedDataset(const Dataset& data, const TrainConfig& config);
  std::size_t size() const { return data_->size(); }
  const Dataset& data() const { return *data_; }
  const std::vector<RouteTensor>& routes() const { return routes_; }
  LabeledBatch make_batch(std::span<const std::size_t> ids, bool pool) const;

 private:
  const Dataset* data_;
  std::vector<RouteTensor> routes_;
};

struct Evaluation {
  double loss = 0.0;
  std::optional<double> mae;
  std::optional<double> auc;
  /// Per-sample predictions: [n, T] for node tasks, [T] for graph tasks.
  std::vector<Tensor> predictions;

  /// The selection metric (MAE or AUC); nullopt when undefined.
  std::optional<double> metric(StopMetric m) const { return m == StopMetric::mae ? mae : auc; }
};

/// Evaluation in inference mode with batches of `batch_size`.
Evaluation evaluate(InformerModel& model, const PreparedDataset& data, std::size_t batch_size);

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  /// Mean batch loss; standardized units when targets are standardized.
  double train_loss = 0.0;
  std::optional<double> train_metric;
  std::optional<double> val_metric;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::optional<double> best_val_metric;
  /// Model checkpoint plus "routes" (route feature config) and "zero_routes".
  nlohmann::json checkpoint;
  /// Training-set metric of the selected checkpoint.
  std::optional<double> best_train_metric;

  nlohmann::json to_json() const;
};

/// Mini-batch Adam training with the step schedule. Batches are reshuffled
/// every epoch with the run seed. The model ends at the checkpoint with the
/// best validation metric, which is also returned. A non-finite loss or
/// gradient raises NumericError naming the epoch and batch.
TrainResult train(InformerModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config);

/// Training loss of `model` on all of `data` as one batch (MAE for node
/// tasks, cross-entropy for graph tasks), in inference mode.
Var dataset_loss(Tape& tape, InformerModel& model, const PreparedDataset& data);

/// Central-difference check of dataset_loss against every model parameter.
GradCheckResult model_grad_check(InformerModel& model, const PreparedDataset& data, double h = 1e-5);

}  // namespace gi
