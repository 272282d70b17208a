// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/params.hpp"

#include <cmath>

#include "graphinformer/errors.hpp"

namespace gi {

Tensor& ParameterStore::add(const std::string& name, Tensor value) {
  auto [it, inserted] = params_.emplace(name, std::move(value));
  if (!inserted) throw ConfigError("duplicate parameter name '" + name + "'");
  it->second.set_requires_grad(true);
  return it->second;
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::vector<Tensor*> ParameterStore::tensors() {
  std::vector<Tensor*> out;
  out.reserve(params_.size());
  for (auto& [_, t] : params_) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> ParameterStore::tensors() const {
  std::vector<const Tensor*> out;
  out.reserve(params_.size());
  for (const auto& [_, t] : params_) out.push_back(&t);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [_, t] : params_) total += t.size();
  return total;
}

void ParameterStore::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

void ParameterStore::assign(const ParameterStore& other) {
  if (other.params_.size() != params_.size()) throw ConfigError("parameter sets differ in size");
  for (auto& [name, t] : params_) {
    const Tensor& src = other.at(name);
    if (src.shape() != t.shape()) {
      throw DimensionError("parameter '" + name + "' has shape " + shape_string(t.shape()) + ", source has " +
                           shape_string(src.shape()));
    }
    std::copy(src.data().begin(), src.data().end(), t.data().begin());
  }
}

nlohmann::json ParameterStore::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, t] : params_) {
    doc[name] = {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
  }
  return doc;
}

ParameterStore ParameterStore::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("parameter map must be a JSON object");
  ParameterStore store;
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object() || !entry.contains("shape") || !entry.contains("data")) {
      throw ParseError("parameter '" + name + "' needs 'shape' and 'data'");
    }
    try {
      store.add(name, Tensor(entry.at("shape").get<Shape>(), entry.at("data").get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("parameter '" + name + "': " + e.what());
    } catch (const DimensionError& e) {
      throw ParseError("parameter '" + name + "': " + e.what());
    }
  }
  return store;
}

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace gi
