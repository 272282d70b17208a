// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/adam.hpp"

#include <cmath>
#include <string>

#include "graphinformer/errors.hpp"

namespace gi {

AdamState AdamState::for_parameters(std::span<const Tensor* const> params, AdamOptions options) {
  AdamState state;
  state.options = options;
  for (const Tensor* p : params) {
    state.first_moment.emplace_back(p->shape());
    state.second_moment.emplace_back(p->shape());
  }
  return state;
}

void adam_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ParameterError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " + std::to_string(state.first_moment.size()) +
                         " moment buffers");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape& s = params[i]->shape();
    if (grads[i].size() != params[i]->size() || state.first_moment[i].shape() != s ||
        state.second_moment[i].shape() != s) {
      throw ParameterError("adam_step: shape mismatch for parameter " + std::to_string(i) + " " + shape_string(s));
    }
  }

  const AdamOptions& o = state.options;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(o.beta1, t);
  const double bias2 = 1.0 - std::pow(o.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    const auto g = grads[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double mhat = m[j] / bias1;
      const double vhat = v[j] / bias2;
      w[j] -= o.learning_rate * mhat / (std::sqrt(vhat) + o.epsilon);
    }
  }
}

void adam_step(std::span<Tensor* const> params, AdamState& state) {
  std::vector<std::span<const double>> grads;
  grads.reserve(params.size());
  for (Tensor* p : params) {
    if (!p->requires_grad()) {
      throw ParameterError("adam_step: parameter " + shape_string(p->shape()) + " has no gradient buffer");
    }
    grads.emplace_back(p->grad());
  }
  adam_step(params, grads, state);
}

}  // namespace gi
