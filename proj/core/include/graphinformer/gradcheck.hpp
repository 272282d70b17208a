// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "graphinformer/tape.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

/// Scalar-valued function of tape variables, rebuilt on a fresh tape per call.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients with central differences.
///
/// The error per coordinate is |analytic - numeric| / max(1, |analytic|).
/// Non-finite function values raise NumericError with input and coordinate.
GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double h = 1e-5);

/// Same check for a function of model parameters: `parameters` are perturbed
/// in place (and restored) and `loss` must watch them on the given tape.
GradCheckResult grad_check_parameters(const std::function<Var(Tape&)>& loss, std::span<Tensor* const> parameters,
                                      double h = 1e-5);

}  // namespace gi
