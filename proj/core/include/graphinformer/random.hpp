// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace gi {

/// Seeded generator used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// Uniform double in [lo, hi) built from raw generator bits, so results do not
/// depend on the standard library's distribution implementations.
inline double uniform(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

inline bool bernoulli(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

}  // namespace gi
