// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/routes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "graphinformer/errors.hpp"
#include "graphinformer/ops.hpp"

namespace gi {

RouteTensor::RouteTensor(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 3 || values_.shape()[0] != values_.shape()[1]) {
    throw DimensionError("route tensor must be [n, n, f], got " + shape_string(values_.shape()));
  }
}

RouteTensor RouteTensor::permuted(std::span<const std::size_t> perm) const {
  const std::size_t n = nodes(), f = features();
  if (perm.size() != n) throw DimensionError("permutation size differs from route tensor size");
  RouteTensor out(n, f);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < f; ++c) out.at(perm[a], perm[b], c) = at(a, b, c);
    }
  }
  return out;
}

RouteTensor route_histogram(const Graph& g, std::size_t k) {
  if (k == 0) throw ConfigError("route histogram length must be at least 1");
  const std::size_t n = g.size();
  RouteTensor out(n, k);
  std::vector<double> power(n * n), next(n * n);
  for (std::size_t i = 0; i < n * n; ++i) power[i] = g.adjacency()[i];
  for (std::size_t r = 0; r < k; ++r) {
    if (r > 0) {
      // next = power * A
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t m = 0; m < n; ++m) {
          const double pam = power[a * n + m];
          if (pam == 0.0) continue;
          for (std::size_t b = 0; b < n; ++b) {
            if (g.has_edge(m, b)) next[a * n + b] += pam;
          }
        }
      }
      power.swap(next);
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) out.at(a, b, r) = power[a * n + b];
    }
  }
  return out;
}

int DistanceMatrix::diameter() const {
  int best = 0;
  for (int d : d_) {
    if (d != kUnreachable) best = std::max(best, d);
  }
  return best;
}

DistanceMatrix shortest_distances(const Graph& g) {
  const std::size_t n = g.size();
  DistanceMatrix dist(n);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v) adj[v] = g.neighbors(v);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    dist(s, s) = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t u : adj[v]) {
        if (dist(s, u) == kUnreachable) {
          dist(s, u) = dist(s, v) + 1;
          queue.push_back(u);
        }
      }
    }
  }
  return dist;
}

DistanceBins DistanceBins::standard(int max_exact) {
  DistanceBins out;
  for (int d = 0; d < max_exact; ++d) out.bins.push_back({d, d});
  out.bins.push_back({max_exact, std::nullopt});
  out.unreachable_bin = true;
  return out;
}

void DistanceBins::validate() const {
  if (bins.empty()) throw ConfigError("distance bins are empty");
  int expected = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const DistanceBin& b = bins[i];
    if (b.lo < expected) throw ConfigError("distance bin " + std::to_string(i) + " overlaps its predecessor");
    if (b.lo > expected) throw ConfigError("distance bins leave a gap before " + std::to_string(b.lo));
    if (!b.hi) {
      if (i + 1 != bins.size()) throw ConfigError("only the last distance bin may be unbounded");
      return;
    }
    if (*b.hi < b.lo) throw ConfigError("distance bin " + std::to_string(i) + " is empty");
    expected = *b.hi + 1;
  }
  throw ConfigError("last distance bin must be unbounded to cover [0, inf)");
}

std::size_t DistanceBins::bin_of(int distance) const {
  if (distance == kUnreachable) return unreachable_bin ? bins.size() : bins.size() - 1;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (distance >= bins[i].lo && (!bins[i].hi || distance <= *bins[i].hi)) return i;
  }
  throw ConfigError("distance " + std::to_string(distance) + " not covered by any bin");
}

RouteTensor distance_bin_features(const DistanceMatrix& dist, const DistanceBins& bins) {
  bins.validate();
  const std::size_t n = dist.size();
  RouteTensor out(n, bins.size());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) out.at(a, b, bins.bin_of(dist(a, b))) = 1.0;
  }
  return out;
}

RouteTensor distance_bin_features(const Graph& g, const DistanceBins& bins) {
  return distance_bin_features(shortest_distances(g), bins);
}

RouteTensor concat_routes(const RouteTensor& a, const RouteTensor& b) {
  if (a.nodes() != b.nodes()) throw DimensionError("route tensors cover different node counts");
  const std::size_t n = a.nodes(), fa = a.features(), fb = b.features();
  RouteTensor out(n, fa + fb);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      for (std::size_t c = 0; c < fa; ++c) out.at(k, l, c) = a.at(k, l, c);
      for (std::size_t c = 0; c < fb; ++c) out.at(k, l, fa + c) = b.at(k, l, c);
    }
  }
  return out;
}

RouteTensor route_features(const Graph& g, const RouteFeatureConfig& config) {
  RouteTensor hist = route_histogram(g, config.histogram_k);
  if (config.log_histogram) {
    for (double& v : hist.values().data()) v = std::log1p(v);
  }
  if (!config.distance_bins) return hist;
  return concat_routes(hist, distance_bin_features(g, *config.distance_bins));
}

Tensor attention_ball_mask(const DistanceMatrix& dist, std::optional<int> radius) {
  if (radius && *radius < 0) throw ConfigError("attention radius must be non-negative");
  const std::size_t n = dist.size();
  Tensor mask(Shape{n, n});
  if (!radius) return mask;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (dist(a, b) > *radius) mask[a * n + b] = kMaskValue;
    }
  }
  return mask;
}

Tensor attention_shell_mask(const DistanceMatrix& dist, int r_min, int r_max) {
  if (r_min < 0 || r_max < r_min) throw ConfigError("attention shell needs 0 <= r_min <= r_max");
  const std::size_t n = dist.size();
  Tensor mask(Shape{n, n}, kMaskValue);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const int d = dist(a, b);
      if (d >= r_min && d <= r_max) mask[a * n + b] = 0.0;
    }
  }
  return mask;
}

nlohmann::json route_config_to_json(const RouteFeatureConfig& config) {
  nlohmann::json bins = nullptr;
  if (config.distance_bins) {
    bins = nlohmann::json::array();
    for (const auto& b : config.distance_bins->bins) {
      bins.push_back({{"lo", b.lo}, {"hi", b.hi ? nlohmann::json(*b.hi) : nlohmann::json(nullptr)}});
    }
  }
  return {{"histogram_k", config.histogram_k},
          {"log_histogram", config.log_histogram},
          {"distance_bins", bins},
          {"unreachable_bin", config.distance_bins ? config.distance_bins->unreachable_bin : false}};
}

RouteFeatureConfig route_config_from_json(const nlohmann::json& doc) {
  try {
    RouteFeatureConfig c;
    c.histogram_k = doc.at("histogram_k").get<std::size_t>();
    c.log_histogram = doc.value("log_histogram", false);
    const auto& bins = doc.at("distance_bins");
    if (!bins.is_null()) {
      DistanceBins d;
      for (const auto& b : bins) {
        d.bins.push_back({b.at("lo").get<int>(), b.at("hi").is_null() ? std::nullopt
                                                                       : std::optional<int>(b.at("hi").get<int>())});
      }
      d.unreachable_bin = doc.value("unreachable_bin", false);
      d.validate();
      c.distance_bins = std::move(d);
    }
    if (c.histogram_k == 0) throw ConfigError("route histogram length must be at least 1");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("route config: ") + e.what());
  }
}

}  // namespace gi
