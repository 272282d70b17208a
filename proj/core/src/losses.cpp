// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "graphinformer/errors.hpp"

namespace gi {

namespace {

std::vector<std::size_t> observed(const Var& pred, const Tensor& target, const Tensor& mask, const char* name) {
  if (target.shape() != pred.shape() || mask.shape() != pred.shape()) {
    throw DimensionError(std::string(name) + ": prediction " + shape_string(pred.shape()) + ", target " +
                         shape_string(target.shape()) + " and mask " + shape_string(mask.shape()) + " must agree");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) idx.push_back(i);
  }
  if (idx.empty()) throw LossError(std::string(name) + ": label mask has no observed entries");
  return idx;
}

}  // namespace

Var masked_mae(Var pred, const Tensor& target, const Tensor& mask) {
  auto idx = observed(pred, target, mask, "masked_mae");
  const Tensor& p = pred.value();
  double total = 0.0;
  std::vector<double> sign(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double d = p[idx[j]] - target[idx[j]];
    total += std::abs(d);
    sign[j] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  return pred.tape()->record(
      "masked_mae", Tensor::scalar(total * inv), {pred},
      [pred, idx = std::move(idx), sign = std::move(sign), inv](std::span<const double> g, const Tensor&, Tape& t) {
        double* gp = t.grad_buffer(pred);
        if (!gp) return;
        for (std::size_t j = 0; j < idx.size(); ++j) gp[idx[j]] += g[0] * inv * sign[j];
      });
}

Var masked_cross_entropy(Var logits, const Tensor& target, const Tensor& mask) {
  auto idx = observed(logits, target, mask, "masked_cross_entropy");
  const Tensor& x = logits.value();
  double total = 0.0;
  std::vector<double> residual(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double xi = x[idx[j]], ti = target[idx[j]];
    if (ti != 0.0 && ti != 1.0) {
      throw LossError("masked_cross_entropy: target " + std::to_string(ti) + " at index " + std::to_string(idx[j]) +
                      " is not 0 or 1");
    }
    total += std::max(xi, 0.0) - xi * ti + std::log1p(std::exp(-std::abs(xi)));
    const double sig = xi >= 0.0 ? 1.0 / (1.0 + std::exp(-xi)) : std::exp(xi) / (1.0 + std::exp(xi));
    residual[j] = sig - ti;
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  return logits.tape()->record(
      "masked_cross_entropy", Tensor::scalar(total * inv), {logits},
      [logits, idx = std::move(idx), residual = std::move(residual), inv](std::span<const double> g, const Tensor&,
                                                                           Tape& t) {
        double* gx = t.grad_buffer(logits);
        if (!gx) return;
        for (std::size_t j = 0; j < idx.size(); ++j) gx[idx[j]] += g[0] * inv * residual[j];
      });
}

}  // namespace gi
