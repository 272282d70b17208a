// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/synth.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "graphinformer/errors.hpp"
#include "graphinformer/routes.hpp"

namespace gi {

std::string to_string(TaskType task) {
  return task == TaskType::node_regression ? "node_regression" : "graph_classification";
}

TaskType task_from_string(const std::string& name) {
  if (name == "node_regression" || name == "node") return TaskType::node_regression;
  if (name == "graph_classification" || name == "graph") return TaskType::graph_classification;
  throw ConfigError("unknown task '" + name + "' (expected node or graph)");
}

void Dataset::validate() const {
  if (n_tasks == 0) throw ConfigError("dataset needs at least one task");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const Shape expected = task == TaskType::node_regression ? Shape{s.graph.size(), n_tasks} : Shape{n_tasks};
    if (s.targets.shape() != expected || s.mask.shape() != expected) {
      throw ConfigError("sample " + std::to_string(i) + ": targets " + shape_string(s.targets.shape()) +
                        " and mask " + shape_string(s.mask.shape()) + " must be " + shape_string(expected));
    }
  }
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > samples.size()) throw ConfigError("dataset slice out of range");
  Dataset out{task, n_tasks, {}};
  out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

Graph random_connected_graph(Rng& rng, std::size_t n, double p) {
  for (;;) {
    Graph g(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (bernoulli(rng, p)) g.add_edge(a, b);
      }
    }
    const DistanceMatrix d = shortest_distances(g);
    bool connected = true;
    for (std::size_t v = 1; v < n && connected; ++v) connected = d(0, v) != kUnreachable;
    if (connected) return g;
  }
}

std::size_t nodes_within(const Graph& g, std::size_t v, int radius) {
  const DistanceMatrix d = shortest_distances(g);
  std::size_t count = 0;
  for (std::size_t u = 0; u < g.size(); ++u) count += d(v, u) <= radius;
  return count;
}

bool has_four_cycle(const Graph& g) {
  // Two distinct nodes with two common neighbours close a 4-cycle.
  const std::size_t n = g.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      std::size_t common = 0;
      for (std::size_t c = 0; c < n; ++c) common += g.has_edge(a, c) && g.has_edge(b, c);
      if (common >= 2) return true;
    }
  }
  return false;
}

Dataset synth_node_task(std::size_t n_graphs, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out{TaskType::node_regression, 1, {}};
  for (std::size_t i = 0; i < n_graphs; ++i) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 5, 12));
    Graph g = random_connected_graph(rng, n, 0.3);
    g.set_name("node-" + std::to_string(i));
    const DistanceMatrix d = shortest_distances(g);
    Tensor targets(Shape{n, 1});
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t count = 0;
      for (std::size_t u = 0; u < n; ++u) count += d(v, u) <= 2;
      targets[v] = static_cast<double>(count);
    }
    out.samples.push_back({std::move(g), std::move(targets), Tensor(Shape{n, 1}, 1.0)});
  }
  return out;
}

Dataset synth_graph_task(std::size_t n_graphs, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out{TaskType::graph_classification, 1, {}};
  for (std::size_t i = 0; i < n_graphs; ++i) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 5, 12));
    const double p = uniform(rng, 0.15, 0.35);
    Graph g = random_connected_graph(rng, n, p);
    g.set_name("graph-" + std::to_string(i));
    const double label = has_four_cycle(g) ? 1.0 : 0.0;
    out.samples.push_back({std::move(g), Tensor(Shape{1}, label), Tensor(Shape{1}, 1.0)});
  }
  return out;
}

namespace {

nlohmann::json tensor_rows(const Tensor& t) {
  if (t.rank() == 1) return std::vector<double>(t.data().begin(), t.data().end());
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t cols = t.shape()[1];
  for (std::size_t r = 0; r < t.shape()[0]; ++r) {
    rows.push_back(std::vector<double>(t.data().begin() + static_cast<std::ptrdiff_t>(r * cols),
                                       t.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  return rows;
}

Tensor rows_tensor(const nlohmann::json& j, const Shape& shape) {
  std::vector<double> data;
  if (shape.size() == 1) {
    data = j.get<std::vector<double>>();
  } else {
    for (const auto& row : j) {
      auto r = row.get<std::vector<double>>();
      data.insert(data.end(), r.begin(), r.end());
    }
  }
  if (data.size() != shape_size(shape)) {
    throw ParseError("targets: expected " + std::to_string(shape_size(shape)) + " values, got " +
                     std::to_string(data.size()));
  }
  return Tensor(shape, std::move(data));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string graph_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu.json", i);
  return buf;
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  data.validate();
  std::filesystem::create_directories(dir / "graphs");
  nlohmann::json targets = nlohmann::json::array(), masks = nlohmann::json::array();
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    std::ofstream(dir / "graphs" / graph_file_name(i)) << graph_to_json(data.samples[i].graph).dump() << '\n';
    targets.push_back(tensor_rows(data.samples[i].targets));
    masks.push_back(tensor_rows(data.samples[i].mask));
  }
  nlohmann::json doc = {{"task", to_string(data.task)}, {"n_tasks", data.n_tasks}, {"targets", targets},
                        {"masks", masks}};
  std::ofstream out(dir / "targets.json");
  if (!out) throw ConfigError("cannot write '" + (dir / "targets.json").string() + "'");
  out << doc.dump() << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(dir / "targets.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("targets.json: " + std::string(e.what()), e.byte);
  }
  try {
    Dataset data;
    data.task = task_from_string(doc.at("task").get<std::string>());
    data.n_tasks = doc.at("n_tasks").get<std::size_t>();
    const auto& targets = doc.at("targets");
    const auto& masks = doc.at("masks");
    if (targets.size() != masks.size()) throw ParseError("targets.json: targets and masks differ in length");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Graph g = load_graph_json(std::string_view(read_file(dir / "graphs" / graph_file_name(i))));
      const Shape shape =
          data.task == TaskType::node_regression ? Shape{g.size(), data.n_tasks} : Shape{data.n_tasks};
      data.samples.push_back({std::move(g), rows_tensor(targets[i], shape), rows_tensor(masks[i], shape)});
    }
    data.validate();
    return data;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("targets.json: " + std::string(e.what()));
  }
}

}  // namespace gi
