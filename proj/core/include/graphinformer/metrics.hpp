// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gi {

/// Rank-based (Mann-Whitney) area under the ROC curve; tied scores count 1/2.
/// Returns nullopt unless both classes are present. Labels are 0 or 1.
std::optional<double> auc_roc(std::span<const double> scores, std::span<const int> labels);

/// Mean of the defined per-task AUCs; nullopt when no task is defined.
std::optional<double> mean_auc(const std::vector<std::optional<double>>& per_task);

}  // namespace gi
