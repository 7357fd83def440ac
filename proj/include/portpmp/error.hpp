#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace portpmp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or problem-file text. `offset` is a byte offset into
/// the parsed source, `line` is 1-based when the error came from a file.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset, std::size_t line = 0)
      : Error(format(message, offset, line)), offset_(offset), line_(line) {}

  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& message, std::size_t offset, std::size_t line) {
    if (line > 0) {
      return "line " + std::to_string(line) + ", offset " + std::to_string(offset) + ": " + message;
    }
    return "offset " + std::to_string(offset) + ": " + message;
  }

  std::size_t offset_;
  std::size_t line_;
};

/// Expression references a name outside the declared symbol set.
class SymbolError : public Error {
 public:
  using Error::Error;
};

/// Evaluation left the domain of a function (log of a non-positive number,
/// division by zero, ...). The message names the offending subexpression.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite value.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& message, std::size_t step, double time)
      : Error("step " + std::to_string(step) + " (t=" + std::to_string(time) + "): " + message),
        step_(step),
        time_(time) {}

  std::size_t step() const { return step_; }
  double time() const { return time_; }

 private:
  std::size_t step_;
  double time_;
};

/// The pointwise Hamiltonian has no maximum over the control set.
class UnboundedHamiltonian : public Error {
 public:
  UnboundedHamiltonian(const std::string& message, std::size_t component)
      : Error(message), component_(component) {}

  /// Zero-based control component along which the objective grows.
  std::size_t component() const { return component_; }

 private:
  std::size_t component_;
};

}  // namespace portpmp
