// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphinformer/graph.hpp"
#include "graphinformer/random.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

enum class TaskType { node_regression, graph_classification };

std::string to_string(TaskType task);
TaskType task_from_string(const std::string& name);

/// One labeled graph. Node tasks: targets and mask are [n, n_tasks];
/// graph tasks: [n_tasks]. Mask entries are 1 (observed) or 0.
struct Sample {
  Graph graph;
  Tensor targets;
  Tensor mask;
};

struct Dataset {
  TaskType task = TaskType::node_regression;
  std::size_t n_tasks = 1;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  /// Throws ConfigError when a sample's target or mask shape disagrees.
  void validate() const;
  /// Samples [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;
};

/// Erdos-Renyi G(n, p) resampled until connected.
Graph random_connected_graph(Rng& rng, std::size_t n, double p);

/// Number of nodes at shortest-path distance <= radius from v, v included.
std::size_t nodes_within(const Graph& g, std::size_t v, int radius);

/// True when some four distinct nodes a-b-c-d-a form a cycle.
bool has_four_cycle(const Graph& g);

/// Connected G(n, 0.3) graphs with n uniform in [5, 12]; per-node target is
/// the number of nodes within distance 2.
Dataset synth_node_task(std::size_t n_graphs, std::uint64_t seed);

/// Connected G(n, p) graphs with n uniform in [5, 12] and p uniform in
/// [0.15, 0.35]; graph label is 1 iff a 4-cycle exists.
Dataset synth_graph_task(std::size_t n_graphs, std::uint64_t seed);

/// Directory layout: graphs/<index>.json (graph documents) plus
/// targets.json {"task", "n_tasks", "targets": [...], "masks": [...]}.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace gi
