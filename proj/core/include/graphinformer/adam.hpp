// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphinformer/tensor.hpp"

namespace gi {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers and step counter for one parameter list.
struct AdamState {
  AdamOptions options;
  std::int64_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Tensor* const> params, AdamOptions options = {});
};

/// One bias-corrected Adam update of `params` with `grads`.
/// Throws ParameterError when params, grads and moments disagree in shape.
void adam_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads, AdamState& state);

/// Convenience overload reading each parameter's own gradient buffer.
void adam_step(std::span<Tensor* const> params, AdamState& state);

}  // namespace gi
