// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "graphinformer/errors.hpp"

namespace gi {
namespace {

void update_worst(GradCheckResult& result, std::size_t input, std::size_t index, double analytic, double numeric) {
  const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
  ++result.coordinates;
  if (result.coordinates == 1 || err > result.max_rel_error) {
    result.max_rel_error = err;
    result.worst_input = input;
    result.worst_index = index;
    result.analytic = analytic;
    result.numeric = numeric;
  }
}

double checked(double value, std::size_t input, std::size_t index) {
  if (!std::isfinite(value)) {
    throw NumericError("grad_check: non-finite function value at input " + std::to_string(input) + ", coordinate " +
                       std::to_string(index));
  }
  return value;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double h) {
  std::vector<Tensor> point(inputs.begin(), inputs.end());

  auto evaluate = [&](bool with_grad, std::vector<std::vector<double>>* grads) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(point.size());
    for (const Tensor& t : point) vars.push_back(with_grad ? tape.variable(t) : tape.constant(t));
    Var out = f(tape, vars);
    if (out.value().size() != 1) throw DimensionError("grad_check: function must be scalar-valued");
    if (with_grad) {
      tape.backward(out);
      for (Var v : vars) grads->push_back(tape.grad(v));
    }
    return out.value()[0];
  };

  std::vector<std::vector<double>> analytic;
  checked(evaluate(true, &analytic), 0, 0);

  GradCheckResult result;
  for (std::size_t i = 0; i < point.size(); ++i) {
    for (std::size_t j = 0; j < point[i].size(); ++j) {
      const double saved = point[i][j];
      point[i][j] = saved + h;
      const double up = checked(evaluate(false, nullptr), i, j);
      point[i][j] = saved - h;
      const double down = checked(evaluate(false, nullptr), i, j);
      point[i][j] = saved;
      update_worst(result, i, j, analytic[i][j], (up - down) / (2.0 * h));
    }
  }
  return result;
}

GradCheckResult grad_check_parameters(const std::function<Var(Tape&)>& loss, std::span<Tensor* const> parameters,
                                      double h) {
  for (Tensor* p : parameters) {
    if (!p->requires_grad()) p->set_requires_grad(true);
    p->zero_grad();
  }
  {
    Tape tape;
    Var out = loss(tape);
    checked(out.value()[0], 0, 0);
    tape.backward(out);
  }
  std::vector<std::vector<double>> analytic;
  for (Tensor* p : parameters) analytic.emplace_back(p->grad().begin(), p->grad().end());

  auto value_only = [&](std::size_t i, std::size_t j) {
    Tape tape;
    return checked(loss(tape).value()[0], i, j);
  };

  GradCheckResult result;
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    Tensor& p = *parameters[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double saved = p[j];
      p[j] = saved + h;
      const double up = value_only(i, j);
      p[j] = saved - h;
      const double down = value_only(i, j);
      p[j] = saved;
      update_worst(result, i, j, analytic[i][j], (up - down) / (2.0 * h));
    }
  }
  for (Tensor* p : parameters) p->zero_grad();
  return result;
}

}  // namespace gi
