// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/graph.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

/// Route features P[k, l, :] for every ordered node pair, stored as [n, n, f].
class RouteTensor {
 public:
  RouteTensor() : values_(Shape{0, 0, 0}) {}
  RouteTensor(std::size_t n, std::size_t f) : values_(Shape{n, n, f}) {}
  explicit RouteTensor(Tensor values);

  std::size_t nodes() const noexcept { return values_.shape()[0]; }
  std::size_t features() const noexcept { return values_.shape()[2]; }

  double& at(std::size_t k, std::size_t l, std::size_t f) { return values_[(k * nodes() + l) * features() + f]; }
  double at(std::size_t k, std::size_t l, std::size_t f) const { return values_[(k * nodes() + l) * features() + f]; }

  const Tensor& values() const noexcept { return values_; }
  Tensor& values() noexcept { return values_; }

  /// Relabels pair (a, b) as (perm[a], perm[b]).
  RouteTensor permuted(std::span<const std::size_t> perm) const;

 private:
  Tensor values_;
};

/// Walk-count histogram: P[a, b, r-1] = (A^r)[a, b] for r = 1..k, via k
/// successive multiplications with the adjacency matrix.
RouteTensor route_histogram(const Graph& g, std::size_t k);

/// Sentinel for pairs in different components; larger than any radius.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// All-pairs BFS distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, kUnreachable) {}

  std::size_t size() const noexcept { return n_; }
  int operator()(std::size_t a, std::size_t b) const { return d_[a * n_ + b]; }
  int& operator()(std::size_t a, std::size_t b) { return d_[a * n_ + b]; }
  /// Largest finite distance.
  int diameter() const;

 private:
  std::size_t n_ = 0;
  std::vector<int> d_;
};

DistanceMatrix shortest_distances(const Graph& g);

/// Inclusive distance range [lo, hi]; no hi means unbounded.
struct DistanceBin {
  int lo = 0;
  std::optional<int> hi;
};

/// Partition of [0, inf) into bins, optionally with a dedicated bin for
/// unreachable pairs placed last. Without that bin, unreachable pairs count as
/// infinitely far and land in the unbounded bin.
struct DistanceBins {
  std::vector<DistanceBin> bins;
  bool unreachable_bin = false;

  /// Exact bins 0..max_exact-1, one bin [max_exact, inf), plus unreachable.
  static DistanceBins standard(int max_exact);

  /// Throws ConfigError on gaps, overlaps, or a bounded last bin.
  void validate() const;
  std::size_t size() const { return bins.size() + (unreachable_bin ? 1 : 0); }
  std::size_t bin_of(int distance) const;
};

/// One-hot shortest-distance encoding per ordered pair.
RouteTensor distance_bin_features(const DistanceMatrix& dist, const DistanceBins& bins);
RouteTensor distance_bin_features(const Graph& g, const DistanceBins& bins);

/// Feature-axis concatenation of route tensors over the same nodes.
RouteTensor concat_routes(const RouteTensor& a, const RouteTensor& b);

/// Route features used by the models: a walk histogram of length k
/// (optionally log1p-compressed), followed by distance bins when configured.
struct RouteFeatureConfig {
  std::size_t histogram_k = 4;
  bool log_histogram = false;
  std::optional<DistanceBins> distance_bins;

  std::size_t feature_count() const { return histogram_k + (distance_bins ? distance_bins->size() : 0); }
};
RouteTensor route_features(const Graph& g, const RouteFeatureConfig& config);

/// {"histogram_k", "log_histogram", "distance_bins": null | [{"lo", "hi"}], "unreachable_bin"}.
nlohmann::json route_config_to_json(const RouteFeatureConfig& config);
RouteFeatureConfig route_config_from_json(const nlohmann::json& doc);

/// Additive n x n mask: 0 where dist <= radius, kMaskValue otherwise.
/// `std::nullopt` is unlimited: every pair is unmasked, unreachable included.
/// A finite radius never admits unreachable pairs.
Tensor attention_ball_mask(const DistanceMatrix& dist, std::optional<int> radius);
/// Shell variant: 0 where r_min <= dist <= r_max.
Tensor attention_shell_mask(const DistanceMatrix& dist, int r_min, int r_max);

}  // namespace gi
