// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "graphinformer/tape.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

// Masks are same-shape tensors with 1 on observed entries and 0 elsewhere.
// Unobserved entries are never read, so their targets may hold anything,
// NaN included. An all-zero mask throws LossError.

/// Mean |pred - target| over observed entries.
Var masked_mae(Var pred, const Tensor& target, const Tensor& mask);

/// Mean binary cross-entropy with logits over observed entries, computed as
/// max(x, 0) - x t + log1p(exp(-|x|)).
Var masked_cross_entropy(Var logits, const Tensor& target, const Tensor& mask);

}  // namespace gi
