// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/tensor.hpp"

namespace gi {

using Edge = std::pair<std::size_t, std::size_t>;

/// Simple undirected graph: symmetric, hollow 0/1 adjacency plus optional
/// per-node feature rows.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n, std::string name = {});

  /// Builds and validates a graph; self-loops, duplicates and out-of-range
  /// endpoints throw ConfigError.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, std::string name = {});

  std::size_t size() const noexcept { return n_; }
  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  bool has_edge(std::size_t a, std::size_t b) const { return adjacency_[a * n_ + b] != 0; }
  void add_edge(std::size_t a, std::size_t b);
  std::size_t degree(std::size_t v) const;
  std::vector<std::size_t> neighbors(std::size_t v) const;
  /// Edges (a, b) with a < b in lexicographic order.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;
  std::span<const std::uint8_t> adjacency() const noexcept { return adjacency_; }

  const std::optional<Tensor>& node_features() const noexcept { return node_features_; }
  /// Rows must equal size(); shape [n, F].
  void set_node_features(Tensor features);

  /// Relabels node v as perm[v]. Node features follow their nodes.
  Graph permuted(std::span<const std::size_t> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.adjacency_ == b.adjacency_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adjacency_;
  std::optional<Tensor> node_features_;
  std::string name_;
};

/// Graph document: {"name"?: str, "n": int, "edges": [[a, b], ...],
/// "node_features"?: [[...], ...]}. An "adjacency" matrix may replace "edges";
/// it must then be symmetric, hollow and 0/1.
Graph load_graph_json(const nlohmann::json& doc);
Graph load_graph_json(std::string_view text);
inline Graph load_graph_json(const char* text) { return load_graph_json(std::string_view(text)); }
inline Graph load_graph_json(const std::string& text) { return load_graph_json(std::string_view(text)); }
nlohmann::json graph_to_json(const Graph& g);

/// Decodes one graph6 line (short form, n <= 62). Trailing newline is allowed.
Graph parse_graph6(std::string_view line);
std::string encode_graph6(const Graph& g);
/// Reads one graph per non-empty line; an optional ">>graph6<<" header is skipped.
std::vector<Graph> read_graph6_file(const std::filesystem::path& path);

}  // namespace gi
