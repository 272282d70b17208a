// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "graphinformer/graph.hpp"
#include "graphinformer/routes.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

/// Zero-padded mini-batch of graphs.
///
/// Sample b occupies slots 0..node_counts[b]-1. With a pool node, the last
/// slot (max_nodes - 1) of every sample is the pool slot: it has zero route
/// features and zero node features, and is never masked between itself and
/// the sample's real nodes. All other slots are padding.
struct BatchedGraphs {
  std::size_t batch_size = 0;
  std::size_t max_nodes = 0;
  std::size_t node_feature_dim = 0;
  std::size_t route_feature_dim = 0;
  bool has_pool = false;

  Tensor node_features;  ///< [B, N, F_nodes]
  Tensor routes;         ///< [B, N, N, F_route]
  Tensor node_mask;      ///< [B, N]: 0 for real and pool slots, kMaskValue for padding
  Tensor route_mask;     ///< [B, N, N]: kMaskValue on padded rows and columns
  std::vector<std::size_t> node_counts;
  std::vector<DistanceMatrix> distances;  ///< per sample, over real nodes only

  std::optional<std::size_t> pool_index() const {
    return has_pool ? std::optional<std::size_t>(max_nodes - 1) : std::nullopt;
  }
  bool is_real(std::size_t b, std::size_t slot) const { return slot < node_counts[b]; }

  /// Route mask restricted to an attention ball (nullopt = unlimited), plus
  /// the node mask broadcast over rows: [B, N, N].
  Tensor attention_mask(std::optional<int> radius) const;
  /// [B, N] with 1 on real node slots.
  Tensor real_node_indicator() const;
  /// [B, N] with 1 on pool slots.
  Tensor pool_indicator() const;
};

/// Stacks graphs and their route tensors. Graphs without node features get
/// the constant scalar feature 1.0. Throws DimensionError when node or route
/// feature dimensions disagree.
BatchedGraphs batch(std::span<const Graph> graphs, std::span<const RouteTensor> routes, bool pool);

}  // namespace gi
