// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter or optimizer input (dropout rate, Adam shapes, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced by a forward or backward computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (distance bins, model config, CLI options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Loss cannot be evaluated, e.g. no observed labels.
class LossError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document or encoding. `offset()` is the byte offset of the
/// offending input byte when it is known, otherwise npos.
class ParseError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ParseError(const std::string& what, std::size_t offset = npos)
      : Error(offset == npos ? what : what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace gi
