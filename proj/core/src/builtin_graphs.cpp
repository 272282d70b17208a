// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/builtin_graphs.hpp"

#include <bit>

#include "graphinformer/errors.hpp"

namespace gi {

namespace {

Graph make(std::size_t n, std::vector<Edge> edges, std::string name) {
  return Graph::from_edges(n, edges, std::move(name));
}

std::vector<Graph> reg_n6_d3() {
  return {
      make(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}}, "RegN6D3-G1"),
      make(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}, {2, 5}}, "RegN6D3-G2"),
  };
}

std::vector<Graph> reg_n8_d3() {
  return {
      make(8, {{0, 1}, {0, 3}, {0, 7}, {1, 2}, {1, 4}, {2, 3}, {2, 6}, {3, 6}, {4, 5}, {4, 7}, {5, 6}, {5, 7}},
           "RegN8D3-G1"),
      make(8, {{0, 1}, {0, 5}, {0, 7}, {1, 2}, {1, 6}, {2, 4}, {2, 7}, {3, 4}, {3, 6}, {3, 7}, {4, 5}, {5, 6}},
           "RegN8D3-G2"),
      make(8, {{0, 2}, {0, 6}, {0, 7}, {1, 3}, {1, 4}, {1, 5}, {2, 4}, {2, 6}, {3, 5}, {3, 7}, {4, 5}, {6, 7}},
           "RegN8D3-G3"),
      make(8, {{0, 3}, {0, 4}, {0, 6}, {1, 4}, {1, 5}, {1, 7}, {2, 3}, {2, 6}, {2, 7}, {3, 5}, {4, 7}, {5, 6}},
           "RegN8D3-G4"),
      make(8, {{0, 3}, {0, 4}, {0, 5}, {1, 4}, {1, 5}, {1, 7}, {2, 3}, {2, 4}, {2, 7}, {3, 6}, {5, 6}, {6, 7}},
           "RegN8D3-G5"),
  };
}

Graph hoffman() {
  const std::vector<std::vector<std::size_t>> lists = {
      {1, 7, 8, 13}, {2, 9, 14}, {3, 8, 10}, {4, 9, 15}, {5, 10, 11}, {6, 12, 14}, {7, 11, 13},
      {12, 15},      {12, 14},   {11, 13},   {12, 15},   {14},        {},           {15},
  };
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < lists.size(); ++a) {
    for (std::size_t b : lists[a]) edges.emplace_back(a, b);
  }
  return make(16, edges, "Hoffman");
}

}  // namespace

Graph hypercube(std::size_t dim) {
  const std::size_t n = std::size_t{1} << dim;
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (std::popcount(a ^ b) == 1) edges.emplace_back(a, b);
    }
  }
  return make(n, edges, "Q" + std::to_string(dim));
}

std::vector<std::string> builtin_graph_names() { return {"RegN6D3", "RegN8D3", "Q4", "Hoffman", "Q4vsHoffman"}; }

std::vector<Graph> builtin_graphs(const std::string& name) {
  if (name == "RegN6D3") return reg_n6_d3();
  if (name == "RegN8D3") return reg_n8_d3();
  if (name == "Q4") return {hypercube(4)};
  if (name == "Hoffman") return {hoffman()};
  if (name == "Q4vsHoffman") return {hypercube(4), hoffman()};
  std::string known;
  for (const auto& n : builtin_graph_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown graph set '" + name + "' (known: " + known + ")");
}

}  // namespace gi
