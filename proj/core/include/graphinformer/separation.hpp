// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/graph.hpp"
#include "graphinformer/informer.hpp"

namespace gi {

enum class EmbeddingNorm { max_abs, l2 };

struct SeparationConfig {
  InformerConfig model;
  std::size_t histogram_k = 4;
  double threshold = 1e-4;
  EmbeddingNorm norm = EmbeddingNorm::max_abs;
  std::uint64_t seed = 1;
};

/// Untrained single-layer injective setup: hidden 8, 4 heads, key, value and
/// route-key size 2, unlimited radius, walk histogram of length 4, constant
/// 1.0 node input, no pool slot.
SeparationConfig isomorphism_config(std::uint64_t seed = 1);

struct SeparationReport {
  std::string set_name;
  std::size_t graph_count = 0;
  std::size_t pairs_tested = 0;
  std::size_t pairs_separated_wl = 0;
  std::size_t pairs_separated_gi = 0;
  /// Graphs whose embedding differs from every other graph's.
  std::size_t graphs_separated_wl = 0;
  std::size_t graphs_separated_gi = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  ScoreMap score_map = ScoreMap::sigmoid;
  std::size_t histogram_k = 0;
  /// Smallest embedding distance over all pairs.
  double min_distance = 0.0;
  std::vector<std::string> graph_names;
  std::vector<std::vector<double>> embeddings;

  bool all_separated() const { return graphs_separated_gi == graph_count; }
  nlohmann::json to_json() const;
};

/// Sum-readout embeddings of `graphs` under an untrained model built from `config`.
std::vector<std::vector<double>> graph_embeddings(const std::vector<Graph>& graphs, const SeparationConfig& config);

double embedding_distance(const std::vector<double>& a, const std::vector<double>& b, EmbeddingNorm norm);

/// Embeds every graph once and compares all pairs, alongside 1-WL.
SeparationReport gi_separate(const std::vector<Graph>& graphs, const SeparationConfig& config,
                             std::string set_name = {});

/// Text table, one row per report: name, WL and Graph Informer counts as
/// "separated / total — percent".
std::string format_separation_table(const std::vector<SeparationReport>& reports);

}  // namespace gi
