#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace shna {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (bad column count, unknown kind, unparsable number).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An API called with arguments that do not fit together (scope mismatch,
/// dimension mismatch, unknown diagram name).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Gradient descent whose objective keeps increasing.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Failure inside one pipeline stage; what() is prefixed with the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace shna
