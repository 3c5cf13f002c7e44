// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace twingrid {

/// Coarse failure categories, mapped to process exit codes by the CLI:
/// Validation -> 1, Runtime -> 2, Io -> 3.
enum class ErrorCategory { Validation, Runtime, Io };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string message)
      : std::runtime_error(std::move(message)), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

/// Bad user input: configs, schemas, parameters, shapes.
class ValidationError : public Error {
public:
  explicit ValidationError(std::string message)
      : Error(ErrorCategory::Validation, std::move(message)) {}
};

/// Numerical or algorithmic failure at run time (divergence, NaN loss, ...).
class RuntimeFailure : public Error {
public:
  explicit RuntimeFailure(std::string message)
      : Error(ErrorCategory::Runtime, std::move(message)) {}
};

/// Filesystem problems, annotated with the offending path.
class IoError : public Error {
public:
  explicit IoError(std::string message)
      : Error(ErrorCategory::Io, std::move(message)) {}
};

}  // namespace twingrid
