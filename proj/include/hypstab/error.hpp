#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Carries the byte offset and offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position, std::string token)
      : Error(message + " at position " + std::to_string(position) +
              (token.empty() ? std::string(" (end of input)") : " near '" + token + "'")),
        detail_(message),
        position_(position),
        token_(std::move(token)) {}

  /// Message without the position suffix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }
  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const std::string& token() const noexcept { return token_; }

 private:
  std::string detail_;
  std::size_t position_;
  std::string token_;
};

/// Evaluation produced a division by zero, NaN or Inf.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Shape or dimension mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition of a numerical construction does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical construction failed (singular solve, degenerate clustering, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypstab
