#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A rule uses a variable that is not bound by its positive body.
class SafetyError : public Error {
 public:
  SafetyError(const std::string& rule, const std::string& variable)
      : Error("unsafe variable " + variable + " in rule: " + rule), variable_(variable) {}

  const std::string& variable() const noexcept { return variable_; }

 private:
  std::string variable_;
};

/// Input outside the supported semantics (e.g. recursion through negation).
class SemanticError : public Error {
 public:
  using Error::Error;
};

/// A configured size or time cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Process exit status for an error: 2 invalid input, 4 resource cap,
/// 5 I/O, 1 anything else.
inline int exit_code(const std::exception& e) noexcept {
  if (dynamic_cast<const ResourceError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 1;
}

}  // namespace nsl
