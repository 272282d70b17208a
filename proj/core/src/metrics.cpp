// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "graphinformer/errors.hpp"

namespace gi {

std::optional<double> auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc_roc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks (1-based) over tie groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const int label = labels[order[k]];
      if (label != 0 && label != 1) throw ConfigError("auc_roc: labels must be 0 or 1");
      if (label == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::optional<double> mean_auc(const std::vector<std::optional<double>>& per_task) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& a : per_task) {
    if (a) {
      total += *a;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

}  // namespace gi
