// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gi {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// A tensor optionally carries a gradient buffer of identical shape. The
/// buffer exists only while `requires_grad()` is true; parameters are tensors
/// with tracking enabled and receive gradients from `Tape::backward`.
class Tensor {
 public:
  /// Scalar zero.
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Multi-index access; throws DimensionError on rank or bound violations.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  /// Reinterprets the data with a new shape of equal size.
  Tensor reshaped(Shape shape) const;

  bool requires_grad() const noexcept { return requires_grad_; }
  void set_requires_grad(bool on);
  std::span<double> grad() noexcept { return grad_; }
  std::span<const double> grad() const noexcept { return grad_; }
  void zero_grad();

  bool all_finite() const noexcept;
  /// Index of the first non-finite entry, or size() when all are finite.
  std::size_t first_non_finite() const noexcept;

  void fill(double value);

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  std::vector<double> grad_;
};

}  // namespace gi
