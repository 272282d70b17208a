// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/separation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "graphinformer/batch.hpp"
#include "graphinformer/errors.hpp"
#include "graphinformer/routes.hpp"
#include "graphinformer/wl.hpp"

namespace gi {

SeparationConfig isomorphism_config(std::uint64_t seed) {
  SeparationConfig c;
  c.model.n_layers = 1;
  c.model.d_hidden = 8;
  c.model.attention.n_heads = 4;
  c.model.attention.d_k = 2;
  c.model.attention.d_v = 2;
  c.model.attention.d_r = 2;
  c.model.attention.score_map = ScoreMap::sigmoid;
  c.model.f_route = 4;
  c.model.f_nodes = 1;
  c.model.pool = false;
  c.histogram_k = 4;
  c.seed = seed;
  return c;
}

std::vector<std::vector<double>> graph_embeddings(const std::vector<Graph>& graphs, const SeparationConfig& config) {
  if (config.histogram_k == 0) throw ConfigError("route histogram length must be at least 1");
  InformerConfig mc = config.model;
  mc.f_route = config.histogram_k;
  InformerModel model(mc, config.seed);
  std::vector<std::vector<double>> out;
  out.reserve(graphs.size());
  // One graph per forward pass: embeddings never depend on batch companions.
  for (const Graph& g : graphs) {
    std::vector<Graph> one{g};
    std::vector<RouteTensor> routes{route_histogram(g, config.histogram_k)};
    BatchedGraphs b = batch(one, routes, mc.pool);
    Tape tape;
    Var e = sum_readout(model.encode(tape, b), b);
    out.emplace_back(e.value().data().begin(), e.value().data().end());
  }
  return out;
}

double embedding_distance(const std::vector<double>& a, const std::vector<double>& b, EmbeddingNorm norm) {
  if (a.size() != b.size()) throw DimensionError("embeddings differ in size");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    acc = norm == EmbeddingNorm::max_abs ? std::max(acc, d) : acc + d * d;
  }
  return norm == EmbeddingNorm::max_abs ? acc : std::sqrt(acc);
}

SeparationReport gi_separate(const std::vector<Graph>& graphs, const SeparationConfig& config,
                             std::string set_name) {
  SeparationReport r;
  r.set_name = std::move(set_name);
  r.graph_count = graphs.size();
  r.threshold = config.threshold;
  r.seed = config.seed;
  r.score_map = config.model.attention.score_map;
  r.histogram_k = config.histogram_k;
  r.embeddings = graph_embeddings(graphs, config);
  for (const Graph& g : graphs) r.graph_names.push_back(g.name());

  const std::size_t n = graphs.size();
  std::vector<bool> gi_unique(n, true), wl_unique(n, true);
  r.min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++r.pairs_tested;
      const double d = embedding_distance(r.embeddings[i], r.embeddings[j], config.norm);
      r.min_distance = std::min(r.min_distance, d);
      if (d > config.threshold) {
        ++r.pairs_separated_gi;
      } else {
        gi_unique[i] = gi_unique[j] = false;
      }
      if (wl_distinguish(graphs[i], graphs[j]) == WLVerdict::separated) {
        ++r.pairs_separated_wl;
      } else {
        wl_unique[i] = wl_unique[j] = false;
      }
    }
  }
  if (n < 2) r.min_distance = 0.0;
  r.graphs_separated_gi = static_cast<std::size_t>(std::count(gi_unique.begin(), gi_unique.end(), true));
  r.graphs_separated_wl = static_cast<std::size_t>(std::count(wl_unique.begin(), wl_unique.end(), true));
  return r;
}

nlohmann::json SeparationReport::to_json() const {
  nlohmann::json embeds = nlohmann::json::array();
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    embeds.push_back({{"graph", graph_names[i]}, {"embedding", embeddings[i]}});
  }
  return {{"set", set_name},
          {"graphs", graph_count},
          {"pairs_tested", pairs_tested},
          {"pairs_separated_wl", pairs_separated_wl},
          {"pairs_separated_gi", pairs_separated_gi},
          {"graphs_separated_wl", graphs_separated_wl},
          {"graphs_separated_gi", graphs_separated_gi},
          {"threshold", threshold},
          {"seed", seed},
          {"score_map", to_string(score_map)},
          {"histogram_k", histogram_k},
          {"min_distance", min_distance},
          {"embeddings", embeds}};
}

namespace {

std::string ratio(std::size_t separated, std::size_t total) {
  char buf[64];
  const double pct = total == 0 ? 100.0 : 100.0 * static_cast<double>(separated) / static_cast<double>(total);
  std::snprintf(buf, sizeof buf, "%zu / %zu — %.0f%%", separated, total, pct);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Column widths count code points; the dash is three bytes.
  std::size_t cols = 0;
  for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
  return s + std::string(width > cols ? width - cols : 0, ' ');
}

}  // namespace

std::string format_separation_table(const std::vector<SeparationReport>& reports) {
  std::ostringstream out;
  out << pad("Graph set", 16) << pad("WL (graphs)", 20) << pad("GI (graphs)", 20) << pad("GI (pairs)", 20)
      << "min dist\n";
  for (const auto& r : reports) {
    char dist[32];
    std::snprintf(dist, sizeof dist, "%.3e", r.min_distance);
    out << pad(r.set_name, 16) << pad(ratio(r.graphs_separated_wl, r.graph_count), 20)
        << pad(ratio(r.graphs_separated_gi, r.graph_count), 20)
        << pad(ratio(r.pairs_separated_gi, r.pairs_tested), 20) << dist << '\n';
  }
  return out.str();
}

}  // namespace gi
