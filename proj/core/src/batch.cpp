// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/batch.hpp"

#include <algorithm>

#include "graphinformer/errors.hpp"
#include "graphinformer/ops.hpp"

namespace gi {
namespace {

std::size_t feature_dim(const Graph& g) { return g.node_features() ? g.node_features()->shape()[1] : 1; }

}  // namespace

BatchedGraphs batch(std::span<const Graph> graphs, std::span<const RouteTensor> routes, bool pool) {
  if (graphs.size() != routes.size()) {
    throw DimensionError("batch: " + std::to_string(graphs.size()) + " graphs but " + std::to_string(routes.size()) +
                         " route tensors");
  }
  if (graphs.empty()) throw DimensionError("batch: no graphs");

  BatchedGraphs out;
  out.batch_size = graphs.size();
  out.has_pool = pool;
  out.node_feature_dim = feature_dim(graphs[0]);
  out.route_feature_dim = routes[0].features();
  std::size_t largest = 0;
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    if (routes[b].nodes() != graphs[b].size()) {
      throw DimensionError("batch: route tensor " + std::to_string(b) + " covers " + std::to_string(routes[b].nodes()) +
                           " nodes, graph has " + std::to_string(graphs[b].size()));
    }
    if (routes[b].features() != out.route_feature_dim) {
      throw DimensionError("batch: route feature dimension " + std::to_string(routes[b].features()) +
                           " differs from " + std::to_string(out.route_feature_dim));
    }
    if (feature_dim(graphs[b]) != out.node_feature_dim) {
      throw DimensionError("batch: node feature dimension " + std::to_string(feature_dim(graphs[b])) +
                           " differs from " + std::to_string(out.node_feature_dim));
    }
    largest = std::max(largest, graphs[b].size());
  }

  const std::size_t B = out.batch_size, N = largest + (pool ? 1 : 0);
  const std::size_t F = out.node_feature_dim, R = out.route_feature_dim;
  out.max_nodes = N;
  out.node_features = Tensor(Shape{B, N, F});
  out.routes = Tensor(Shape{B, N, N, R});
  out.node_mask = Tensor(Shape{B, N}, kMaskValue);
  out.route_mask = Tensor(Shape{B, N, N}, kMaskValue);

  for (std::size_t b = 0; b < B; ++b) {
    const Graph& g = graphs[b];
    const std::size_t n = g.size();
    out.node_counts.push_back(n);
    out.distances.push_back(shortest_distances(g));

    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < F; ++c) {
        out.node_features[(b * N + v) * F + c] = g.node_features() ? (*g.node_features())[v * F + c] : 1.0;
      }
      out.node_mask[b * N + v] = 0.0;
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        out.route_mask[(b * N + k) * N + l] = 0.0;
        for (std::size_t c = 0; c < R; ++c) out.routes[((b * N + k) * N + l) * R + c] = routes[b].at(k, l, c);
      }
    }
    if (pool) {
      const std::size_t p = N - 1;
      out.node_mask[b * N + p] = 0.0;
      out.route_mask[(b * N + p) * N + p] = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        out.route_mask[(b * N + v) * N + p] = 0.0;
        out.route_mask[(b * N + p) * N + v] = 0.0;
      }
    }
  }
  return out;
}

Tensor BatchedGraphs::attention_mask(std::optional<int> radius) const {
  const std::size_t B = batch_size, N = max_nodes;
  Tensor mask = route_mask;
  if (radius) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t n = node_counts[b];
      const Tensor ball = attention_ball_mask(distances[b], radius);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) mask[(b * N + k) * N + l] = ball[k * n + l];
      }
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t l = 0; l < N; ++l) mask[(b * N + k) * N + l] += node_mask[b * N + l];
    }
  }
  return mask;
}

Tensor BatchedGraphs::real_node_indicator() const {
  Tensor out(Shape{batch_size, max_nodes});
  for (std::size_t b = 0; b < batch_size; ++b) {
    for (std::size_t v = 0; v < node_counts[b]; ++v) out[b * max_nodes + v] = 1.0;
  }
  return out;
}

Tensor BatchedGraphs::pool_indicator() const {
  Tensor out(Shape{batch_size, max_nodes});
  if (has_pool) {
    for (std::size_t b = 0; b < batch_size; ++b) out[b * max_nodes + max_nodes - 1] = 1.0;
  }
  return out;
}

}  // namespace gi
