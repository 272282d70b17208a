// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "graphinformer/graph.hpp"

namespace gi {

/// Named graph sets:
///   RegN6D3      both connected 3-regular graphs on 6 nodes
///   RegN8D3      all five connected 3-regular graphs on 8 nodes
///   Q4           the 4-dimensional hypercube
///   Hoffman      the Hoffman graph (cospectral with Q4)
///   Q4vsHoffman  Q4 followed by Hoffman
/// Unknown names throw ConfigError.
std::vector<Graph> builtin_graphs(const std::string& name);

std::vector<std::string> builtin_graph_names();

Graph hypercube(std::size_t dim);

}  // namespace gi
