// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "graphinformer/tensor.hpp"

namespace gi {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape over a fixed operation set.
///
/// Every forward operation appends one node holding its output value and a
/// closure that propagates the output gradient to its inputs. `backward`
/// walks the nodes in reverse recording order. Gradients are first order only.
/// A tape is single-threaded; independent tapes share no state.
class Tape {
 public:
  /// Propagates `out_grad` (same size as `out`, the node value) into input buffers.
  using BackwardFn = std::function<void(std::span<const double> out_grad, const Tensor& out, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is readable through grad() after backward.
  Var variable(Tensor value);
  /// Leaf bound to a parameter; backward accumulates into `parameter.grad()`.
  /// The parameter must outlive the call to backward.
  Var watch(Tensor& parameter);

  /// Appends an operation node. Non-finite outputs raise NumericError naming `op`.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must hold one element.
  void backward(Var root);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }
  /// Gradient of the last backward root w.r.t. `v` (zeros when untracked).
  std::vector<double> grad(Var v) const;

  /// Gradient accumulation buffer for an input inside a BackwardFn, or
  /// nullptr when that input does not need a gradient.
  double* grad_buffer(Var v);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    bool needs_grad = false;
    std::vector<double> grad;
    BackwardFn backward;
    Tensor* sink = nullptr;
    const char* op = "";
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // stable addresses: value() references survive later records
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

}  // namespace gi
