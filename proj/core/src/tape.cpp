// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/tape.hpp"

#include <algorithm>
#include <cmath>

#include "graphinformer/errors.hpp"

namespace gi {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.op = "constant";
  return push(std::move(node));
}

Var Tape::variable(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = true;
  node.op = "variable";
  return push(std::move(node));
}

Var Tape::watch(Tensor& parameter) {
  if (!parameter.requires_grad()) parameter.set_requires_grad(true);
  Node node;
  node.value = parameter;
  node.value.set_requires_grad(false);
  node.needs_grad = true;
  node.sink = &parameter;
  node.op = "parameter";
  return push(std::move(node));
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  const std::size_t bad = value.first_non_finite();
  if (bad != value.size()) {
    throw NumericError(std::string(op) + ": non-finite output at flat index " + std::to_string(bad) +
                       " of shape " + shape_string(value.shape()));
  }
  Node node;
  node.value = std::move(value);
  node.op = op;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw DimensionError(std::string(op) + ": input recorded on a different tape");
    node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  return push(std::move(node));
}

double* Tape::grad_buffer(Var v) {
  Node& node = nodes_[v.id()];
  if (!node.needs_grad) return nullptr;
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad.data();
}

std::vector<double> Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty()) return std::vector<double>(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw DimensionError("backward: root recorded on a different tape");
  if (nodes_[root.id()].value.size() != 1) {
    throw DimensionError("backward: root must be scalar, got shape " +
                         shape_string(nodes_[root.id()].value.shape()));
  }
  for (Node& node : nodes_) node.grad.clear();
  if (!nodes_[root.id()].needs_grad) return;
  nodes_[root.id()].grad.assign(1, 1.0);

  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty()) continue;
    if (node.backward) {
      // The closure may grow other nodes' buffers but never this node's, so
      // the span stays valid.
      node.backward(std::span<const double>(node.grad), node.value, *this);
    }
    if (node.sink != nullptr) {
      auto dst = node.sink->grad();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += node.grad[j];
    }
    const auto bad = std::find_if(node.grad.begin(), node.grad.end(), [](double g) { return !std::isfinite(g); });
    if (bad != node.grad.end()) {
      throw NumericError(std::string("backward through ") + node.op + ": non-finite gradient at flat index " +
                         std::to_string(bad - node.grad.begin()));
    }
  }
}

}  // namespace gi
