// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "graphinformer/graph.hpp"

namespace gi {

/// Sorted (color, count) pairs.
using ColorHistogram = std::vector<std::pair<std::size_t, std::size_t>>;

/// 1-WL color refinement trace. Iteration 0 is the uniform coloring.
struct WLColoring {
  std::vector<std::vector<std::size_t>> colors;  ///< per iteration, per node
  std::vector<ColorHistogram> histograms;        ///< per iteration
  bool stable = false;                           ///< the last iteration did not split any class

  const std::vector<std::size_t>& final_colors() const { return colors.back(); }
  std::size_t iterations() const { return colors.size() - 1; }
  std::size_t class_count() const;
};

/// Refines until no class splits or `max_iter` rounds have run (default n).
/// New colors index the distinct (own color, sorted neighbor colors) keys in
/// sorted order, so color ids are exact and collision-free.
WLColoring wl_refine(const Graph& g, std::optional<std::size_t> max_iter = std::nullopt);

enum class WLVerdict { separated, indistinguishable };

/// Joint refinement of both graphs with a shared color dictionary; separated
/// iff the stable color histograms differ. Different node counts are
/// trivially separated.
WLVerdict wl_distinguish(const Graph& g1, const Graph& g2);

}  // namespace gi
