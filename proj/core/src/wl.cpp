// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/wl.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace gi {

namespace {

using Key = std::pair<std::size_t, std::vector<std::size_t>>;

std::vector<std::size_t> refine_once(const std::vector<std::vector<std::size_t>>& adjacency,
                                     const std::vector<std::size_t>& colors) {
  std::vector<Key> keys(colors.size());
  for (std::size_t v = 0; v < colors.size(); ++v) {
    std::vector<std::size_t> nbr;
    nbr.reserve(adjacency[v].size());
    for (std::size_t u : adjacency[v]) nbr.push_back(colors[u]);
    std::sort(nbr.begin(), nbr.end());
    keys[v] = {colors[v], std::move(nbr)};
  }
  std::map<Key, std::size_t> dictionary;
  for (const Key& k : keys) dictionary.emplace(k, 0);
  std::size_t next = 0;
  for (auto& [_, id] : dictionary) id = next++;
  std::vector<std::size_t> out(colors.size());
  for (std::size_t v = 0; v < colors.size(); ++v) out[v] = dictionary.at(keys[v]);
  return out;
}

std::size_t distinct(const std::vector<std::size_t>& colors) {
  return std::set<std::size_t>(colors.begin(), colors.end()).size();
}

ColorHistogram histogram(std::span<const std::size_t> colors) {
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t c : colors) ++counts[c];
  return {counts.begin(), counts.end()};
}

std::vector<std::vector<std::size_t>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<std::size_t>> adj(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) adj[v] = g.neighbors(v);
  return adj;
}

}  // namespace

std::size_t WLColoring::class_count() const { return distinct(colors.back()); }

WLColoring wl_refine(const Graph& g, std::optional<std::size_t> max_iter) {
  const auto adj = adjacency_lists(g);
  const std::size_t limit = max_iter.value_or(g.size());
  WLColoring out;
  out.colors.emplace_back(g.size(), 0);
  out.histograms.push_back(histogram(out.colors.back()));
  out.stable = g.size() == 0;
  for (std::size_t it = 0; it < limit && !out.stable; ++it) {
    auto next = refine_once(adj, out.colors.back());
    // Refinement never merges classes, so an unchanged count means no split.
    out.stable = distinct(next) == distinct(out.colors.back());
    out.colors.push_back(std::move(next));
    out.histograms.push_back(histogram(out.colors.back()));
  }
  return out;
}

WLVerdict wl_distinguish(const Graph& g1, const Graph& g2) {
  if (g1.size() != g2.size()) return WLVerdict::separated;
  const std::size_t n = g1.size();
  std::vector<std::vector<std::size_t>> adj = adjacency_lists(g1);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> nbr;
    for (std::size_t u : g2.neighbors(v)) nbr.push_back(u + n);
    adj.push_back(std::move(nbr));
  }
  std::vector<std::size_t> colors(2 * n, 0);
  for (std::size_t it = 0; it <= 2 * n; ++it) {
    auto next = refine_once(adj, colors);
    const bool stable = distinct(next) == distinct(colors);
    colors = std::move(next);
    const std::span<const std::size_t> all(colors);
    if (histogram(all.first(n)) != histogram(all.subspan(n))) return WLVerdict::separated;
    if (stable) break;
  }
  return WLVerdict::indistinguishable;
}

}  // namespace gi
