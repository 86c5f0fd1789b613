#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace afp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or malformed input data.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document; carries the JSON pointer of the
/// offending value.
class ParseError : public ConfigurationError {
 public:
  ParseError(const std::string& message, std::string pointer)
      : ConfigurationError(message + " (at " + (pointer.empty() ? "/" : pointer) + ")"),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// An algebraic axiom fails (closure, inclusion, expectation properties).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed the configured dimension cap.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, double required)
      : Error(what), required_(required) {}
  double required() const { return required_; }

 private:
  double required_;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested identity would be distorted by the Fock-space truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Word family violates the first/last index separation hypothesis.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

}  // namespace afp
