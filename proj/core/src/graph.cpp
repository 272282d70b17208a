// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/graph.hpp"

#include <algorithm>

#include "graphinformer/errors.hpp"

namespace gi {

Graph::Graph(std::size_t n, std::string name) : n_(n), adjacency_(n * n, 0), name_(std::move(name)) {}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, std::string name) {
  Graph g(n, std::move(name));
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  return g;
}

void Graph::add_edge(std::size_t a, std::size_t b) {
  if (a >= n_ || b >= n_) {
    throw ConfigError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range for n = " +
                      std::to_string(n_));
  }
  if (a == b) throw ConfigError("self-loop on node " + std::to_string(a));
  if (has_edge(a, b)) {
    throw ConfigError("duplicate edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
  }
  adjacency_[a * n_ + b] = 1;
  adjacency_[b * n_ + a] = 1;
}

std::size_t Graph::degree(std::size_t v) const {
  return static_cast<std::size_t>(
      std::count(adjacency_.begin() + static_cast<std::ptrdiff_t>(v * n_),
                 adjacency_.begin() + static_cast<std::ptrdiff_t>((v + 1) * n_), std::uint8_t{1}));
}

std::vector<std::size_t> Graph::neighbors(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n_; ++u) {
    if (has_edge(v, u)) out.push_back(u);
  }
  return out;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = a + 1; b < n_; ++b) {
      if (has_edge(a, b)) out.emplace_back(a, b);
    }
  }
  return out;
}

std::size_t Graph::edge_count() const {
  return static_cast<std::size_t>(std::count(adjacency_.begin(), adjacency_.end(), std::uint8_t{1})) / 2;
}

void Graph::set_node_features(Tensor features) {
  if (features.rank() != 2 || features.shape()[0] != n_) {
    throw DimensionError("node features " + shape_string(features.shape()) + " do not have " + std::to_string(n_) +
                         " rows");
  }
  node_features_ = std::move(features);
}

Graph Graph::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw DimensionError("permutation size differs from node count");
  std::vector<bool> seen(n_, false);
  for (std::size_t p : perm) {
    if (p >= n_ || seen[p]) throw ConfigError("not a permutation");
    seen[p] = true;
  }
  Graph out(n_, name_);
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) out.adjacency_[perm[a] * n_ + perm[b]] = adjacency_[a * n_ + b];
  }
  if (node_features_) {
    const std::size_t f = node_features_->shape()[1];
    Tensor feats(Shape{n_, f});
    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t c = 0; c < f; ++c) feats[perm[v] * f + c] = (*node_features_)[v * f + c];
    }
    out.node_features_ = std::move(feats);
  }
  return out;
}

Graph load_graph_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("graph document must be a JSON object");
    if (!doc.contains("n")) throw ParseError("graph document lacks 'n'");
    const auto n_signed = doc.at("n").get<long long>();
    if (n_signed < 0) throw ParseError("'n' must be non-negative");
    const auto n = static_cast<std::size_t>(n_signed);
    Graph g(n, doc.value("name", std::string{}));

    if (doc.contains("adjacency")) {
      const auto rows = doc.at("adjacency").get<std::vector<std::vector<int>>>();
      if (rows.size() != n) throw ParseError("adjacency has " + std::to_string(rows.size()) + " rows, n = " + std::to_string(n));
      for (std::size_t a = 0; a < n; ++a) {
        if (rows[a].size() != n) throw ParseError("adjacency row " + std::to_string(a) + " has wrong length");
        for (std::size_t b = 0; b < n; ++b) {
          const int v = rows[a][b];
          if (v != 0 && v != 1) throw ParseError("adjacency entries must be 0 or 1");
          if (v != rows[b][a]) {
            throw ConfigError("adjacency is not symmetric at (" + std::to_string(a) + ", " + std::to_string(b) + ")");
          }
          if (a == b && v) throw ConfigError("self-loop on node " + std::to_string(a));
          if (a < b && v) g.add_edge(a, b);
        }
      }
    } else {
      if (!doc.contains("edges")) throw ParseError("graph document lacks 'edges'");
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ParseError("each edge must be a pair [a, b]");
        const auto a = e[0].get<long long>();
        const auto b = e[1].get<long long>();
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
          throw ConfigError("edge [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] references a node outside 0.." + std::to_string(n == 0 ? 0 : n - 1));
        }
        g.add_edge(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      }
    }

    if (doc.contains("node_features") && !doc.at("node_features").is_null()) {
      const auto rows = doc.at("node_features").get<std::vector<std::vector<double>>>();
      if (rows.size() != n) throw ConfigError("node_features has " + std::to_string(rows.size()) + " rows, n = " + std::to_string(n));
      const std::size_t f = n ? rows[0].size() : 0;
      std::vector<double> flat;
      for (const auto& r : rows) {
        if (r.size() != f) throw ParseError("node_features rows differ in length");
        flat.insert(flat.end(), r.begin(), r.end());
      }
      g.set_node_features(Tensor(Shape{n, f}, std::move(flat)));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph document: ") + e.what());
  }
}

Graph load_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph document: ") + e.what(), e.byte);
  }
  return load_graph_json(doc);
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json doc;
  doc["name"] = g.name();
  doc["n"] = g.size();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  doc["edges"] = std::move(edges);
  if (g.node_features()) {
    const Tensor& f = *g.node_features();
    const std::size_t cols = f.shape()[1];
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t v = 0; v < g.size(); ++v) {
      rows.push_back(std::vector<double>(f.data().begin() + static_cast<std::ptrdiff_t>(v * cols),
                                         f.data().begin() + static_cast<std::ptrdiff_t>((v + 1) * cols)));
    }
    doc["node_features"] = std::move(rows);
  }
  return doc;
}

}  // namespace gi
