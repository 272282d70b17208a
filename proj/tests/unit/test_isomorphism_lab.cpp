// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "graphinformer/builtin_graphs.hpp"
#include "graphinformer/errors.hpp"
#include "graphinformer/separation.hpp"
#include "graphinformer/spectrum.hpp"
#include "graphinformer/wl.hpp"
#include "oracles.hpp"

namespace gi {
namespace {

Graph triangle() {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
  return Graph::from_edges(3, e);
}

Graph path3() {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  return Graph::from_edges(3, e);
}

bool refines(const std::vector<std::size_t>& finer, const std::vector<std::size_t>& coarser) {
  for (std::size_t a = 0; a < finer.size(); ++a)
    for (std::size_t b = 0; b < finer.size(); ++b)
      if (finer[a] == finer[b] && coarser[a] != coarser[b]) return false;
  return true;
}

TEST(WL, Examples) {
  WLColoring k3 = wl_refine(triangle());
  for (const auto& colors : k3.colors) EXPECT_EQ(std::set<std::size_t>(colors.begin(), colors.end()).size(), 1u);
  WLColoring p = wl_refine(path3());
  ASSERT_TRUE(p.stable);
  const auto& c = p.final_colors();
  EXPECT_EQ(c[0], c[2]);
  EXPECT_NE(c[0], c[1]);
  EXPECT_EQ(p.class_count(), 2u);
  for (const std::string& name : {"RegN6D3", "RegN8D3", "Q4vsHoffman"})
    for (const Graph& g : builtin_graphs(name)) {
      WLColoring w = wl_refine(g);
      for (const auto& colors : w.colors) EXPECT_EQ(std::set<std::size_t>(colors.begin(), colors.end()).size(), 1u);
    }
}

TEST(WL, MonotoneAndBounded) {
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 9;
    Graph g = oracle::random_graph(rng, n, 0.35);
    WLColoring w = wl_refine(g);
    EXPECT_TRUE(w.stable);
    EXPECT_LE(w.iterations(), n);
    for (std::size_t t = 0; t + 1 < w.colors.size(); ++t) EXPECT_TRUE(refines(w.colors[t + 1], w.colors[t]));
  }
}

TEST(WL, Distinguish) {
  EXPECT_EQ(wl_distinguish(triangle(), path3()), WLVerdict::separated);
  const auto pair = builtin_graphs("RegN6D3");
  EXPECT_EQ(wl_distinguish(pair[0], pair[1]), WLVerdict::indistinguishable);
  EXPECT_EQ(wl_distinguish(pair[0], pair[0]), WLVerdict::indistinguishable);
  EXPECT_EQ(wl_distinguish(triangle(), Graph(4)), WLVerdict::separated);
  Rng rng(2);
  Graph g = oracle::random_graph(rng, 7, 0.4);
  EXPECT_EQ(wl_distinguish(g, g.permuted(oracle::random_permutation(rng, 7))), WLVerdict::indistinguishable);
}

TEST(Builtins, Families) {
  const auto n6 = builtin_graphs("RegN6D3");
  const auto n8 = builtin_graphs("RegN8D3");
  const auto qh = builtin_graphs("Q4vsHoffman");
  ASSERT_EQ(n6.size(), 2u);
  ASSERT_EQ(n8.size(), 5u);
  ASSERT_EQ(qh.size(), 2u);
  const auto check_regular = [](const Graph& g, std::size_t n, std::size_t d) {
    ASSERT_EQ(g.size(), n);
    for (std::size_t v = 0; v < n; ++v) EXPECT_EQ(g.degree(v), d);
    const auto dist = oracle::bfs_distances(g);
    for (std::size_t v = 0; v < n; ++v) EXPECT_GE(dist[0][v], 0);  // connected
  };
  for (const Graph& g : n6) check_regular(g, 6, 3);
  for (const Graph& g : n8) check_regular(g, 8, 3);
  for (const Graph& g : qh) check_regular(g, 16, 4);
  // Pairwise non-isomorphic, by exhaustive permutation search.
  for (const auto* set : {&n6, &n8})
    for (std::size_t i = 0; i < set->size(); ++i)
      for (std::size_t j = i + 1; j < set->size(); ++j) EXPECT_FALSE(oracle::isomorphic_bruteforce((*set)[i], (*set)[j]));
  EXPECT_THROW(builtin_graphs("Petersen"), ConfigError);
  for (const std::string& name : builtin_graph_names()) EXPECT_FALSE(builtin_graphs(name).empty());
}

TEST(Builtins, HypercubeAndHoffman) {
  Graph q4 = hypercube(4);
  for (std::size_t a = 0; a < 16; ++a)
    for (std::size_t b = 0; b < 16; ++b) EXPECT_EQ(q4.has_edge(a, b), __builtin_popcount(unsigned(a ^ b)) == 1);
  const auto qh = builtin_graphs("Q4vsHoffman");
  EXPECT_EQ(qh[0], q4);
  EXPECT_EQ(qh[1], builtin_graphs("Hoffman")[0]);
  // In Q4 every pair at distance 2 shares exactly two neighbours; Hoffman does not.
  const auto common_counts = [](const Graph& g) {
    std::set<std::size_t> counts;
    const auto d = oracle::bfs_distances(g);
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b) {
        if (d[a][b] != 2) continue;
        std::size_t c = 0;
        for (std::size_t u = 0; u < g.size(); ++u) c += g.has_edge(a, u) && g.has_edge(b, u);
        counts.insert(c);
      }
    return counts;
  };
  EXPECT_EQ(common_counts(qh[0]), std::set<std::size_t>{2});
  EXPECT_NE(common_counts(qh[1]), std::set<std::size_t>{2});
}

TEST(Spectrum, Examples) {
  EXPECT_EQ(spectrum_compare(triangle(), triangle()), SpectrumVerdict::cospectral);
  EXPECT_EQ(spectrum_compare(triangle(), path3()), SpectrumVerdict::different);
  const auto qh = builtin_graphs("Q4vsHoffman");
  EXPECT_EQ(spectrum_compare(qh[0], qh[1]), SpectrumVerdict::cospectral);
  // Q4 spectrum: 4, 2 (x4), 0 (x6), -2 (x4), -4.
  const auto s = adjacency_spectrum(qh[0]);
  const std::vector<double> expected{-4, -2, -2, -2, -2, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 4};
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(s[i], expected[i], 1e-9);
  // Triangle: characteristic polynomial (x - 2)(x + 1)^2.
  const auto t = adjacency_spectrum(triangle());
  EXPECT_NEAR(t[0], -1.0, 1e-12);
  EXPECT_NEAR(t[1], -1.0, 1e-12);
  EXPECT_NEAR(t[2], 2.0, 1e-12);
  EXPECT_EQ(spectrum_compare(triangle(), Graph(4)), SpectrumVerdict::different);
}

TEST(Separation, TableOneFamilies) {
  for (ScoreMap map : {ScoreMap::sigmoid, ScoreMap::softmax}) {
    for (const std::string& name : {"RegN6D3", "RegN8D3", "Q4vsHoffman"}) {
      SeparationConfig c = isomorphism_config(1);
      c.model.attention.score_map = map;
      SeparationReport r = gi_separate(builtin_graphs(name), c, name);
      EXPECT_EQ(r.pairs_separated_wl, 0u) << name;
      EXPECT_EQ(r.pairs_separated_gi, r.pairs_tested) << name;
      EXPECT_TRUE(r.all_separated()) << name;
      EXPECT_LE(r.pairs_separated_gi, r.pairs_tested);
      EXPECT_EQ(r.seed, 1u);
      EXPECT_GT(r.min_distance, c.threshold);
    }
  }
}

TEST(Separation, RelabeledCopiesNeverSeparate) {
  Rng rng(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Graph> gs;
    for (const Graph& g : builtin_graphs("RegN8D3")) gs.push_back(g);
    Graph r = oracle::random_graph(rng, 9, 0.4);
    gs.push_back(r);
    std::vector<Graph> copies;
    for (const Graph& g : gs) copies.push_back(g.permuted(oracle::random_permutation(rng, g.size())));
    SeparationConfig c = isomorphism_config(seed);
    const auto a = graph_embeddings(gs, c), b = graph_embeddings(copies, c);
    for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_LT(embedding_distance(a[i], b[i], c.norm), c.threshold);
  }
}

TEST(Separation, AtLeastAsStrongAsWL) {
  Rng rng(4);
  std::vector<Graph> gs;
  for (int i = 0; i < 12; ++i) gs.push_back(oracle::random_graph(rng, 6, 0.45));
  for (const Graph& g : builtin_graphs("RegN6D3")) gs.push_back(g);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SeparationConfig c = isomorphism_config(seed);
    const auto e = graph_embeddings(gs, c);
    for (std::size_t i = 0; i < gs.size(); ++i)
      for (std::size_t j = i + 1; j < gs.size(); ++j) {
        if (wl_distinguish(gs[i], gs[j]) != WLVerdict::separated) continue;
        EXPECT_GT(embedding_distance(e[i], e[j], c.norm), c.threshold) << "seed " << seed << " pair " << i << "," << j;
      }
  }
}

TEST(Separation, NonCospectralPairsWithFullLengthHistograms) {
  const auto check_pair = [](const Graph& a, const Graph& b) {
    if (spectrum_compare(a, b) != SpectrumVerdict::different || a.size() != b.size()) return;
    SeparationConfig c = isomorphism_config(1);
    c.histogram_k = a.size();
    SeparationReport r = gi_separate({a, b}, c);
    EXPECT_EQ(r.pairs_separated_gi, 1u) << encode_graph6(a) << " vs " << encode_graph6(b);
  };
  for (const std::string& name : {"RegN6D3", "RegN8D3", "Q4vsHoffman"}) {
    const auto gs = builtin_graphs(name);
    for (std::size_t i = 0; i < gs.size(); ++i)
      for (std::size_t j = i + 1; j < gs.size(); ++j) check_pair(gs[i], gs[j]);
  }
  Rng rng(5);
  int tested = 0;
  while (tested < 50) {
    const std::size_t n = 4 + static_cast<std::size_t>(uniform_int(rng, 0, 4));
    Graph a = oracle::random_graph(rng, n, 0.4), b = oracle::random_graph(rng, n, 0.4);
    if (spectrum_compare(a, b) != SpectrumVerdict::different) continue;
    check_pair(a, b);
    ++tested;
  }
}

TEST(Separation, ReportJsonAndTable) {
  SeparationReport r = gi_separate(builtin_graphs("RegN8D3"), isomorphism_config(1), "RegN8D3");
  const nlohmann::json j = r.to_json();
  EXPECT_EQ(j["set"], "RegN8D3");
  EXPECT_EQ(j["seed"], 1);
  EXPECT_EQ(j["embeddings"].size(), 5u);
  EXPECT_EQ(j.dump(), gi_separate(builtin_graphs("RegN8D3"), isomorphism_config(1), "RegN8D3").to_json().dump());
  const std::string table = format_separation_table({r});
  EXPECT_NE(table.find("5 / 5 — 100%"), std::string::npos) << table;
}

TEST(Separation, EmbeddingDistance) {
  EXPECT_EQ(embedding_distance({1, 2}, {1, 5}, EmbeddingNorm::max_abs), 3.0);
  EXPECT_EQ(embedding_distance({0, 0}, {3, 4}, EmbeddingNorm::l2), 5.0);
  EXPECT_THROW(embedding_distance({1}, {1, 2}, EmbeddingNorm::l2), DimensionError);
}

}  // namespace
}  // namespace gi
