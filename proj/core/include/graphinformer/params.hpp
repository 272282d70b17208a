// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphinformer/random.hpp"
#include "graphinformer/tensor.hpp"

namespace gi {

/// Named parameter tensors, iterated in lexicographic name order.
///
/// Element addresses are stable for the lifetime of the store, so layers may
/// hold references into it.
class ParameterStore {
 public:
  /// Adds a parameter with gradient tracking enabled. Duplicate names throw ConfigError.
  Tensor& add(const std::string& name, Tensor value);

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  std::vector<std::string> names() const;
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();

  /// Copies values from a store with identical names and shapes.
  void assign(const ParameterStore& other);

  /// {"name": {"shape": [...], "data": [...]}, ...}. Doubles are written in
  /// shortest round-trip form, so save/load is bit-exact.
  nlohmann::json to_json() const;
  static ParameterStore from_json(const nlohmann::json& doc);

 private:
  std::map<std::string, Tensor> params_;
};

/// Uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng);

}  // namespace gi
