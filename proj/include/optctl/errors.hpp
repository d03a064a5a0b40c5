#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or input text. `position` is a 0-based column for
/// expression text, `line` is 1-based for file formats (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position, std::size_t line = 0)
      : Error(format(message, position, line)), position_(position), line_(line) {}

  std::size_t position() const { return position_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& message, std::size_t position, std::size_t line) {
    if (line > 0) return "line " + std::to_string(line) + ": " + message;
    return message + " (at column " + std::to_string(position + 1) + ")";
  }

  std::size_t position_;
  std::size_t line_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ProblemError : public Error {
 public:
  using Error::Error;
};

class NotLinearQuadratic : public Error {
 public:
  using Error::Error;
};

class SingularKKT : public Error {
 public:
  using Error::Error;
};

class CircuitError : public Error {
 public:
  enum class Kind {
    DuplicatePin,
    UnknownPin,
    UnknownComponent,
    NotConnected,
    NonlinearAlgebraicPart,
    StructurallySingular,
    InvalidComponent,
  };

  CircuitError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace optctl
