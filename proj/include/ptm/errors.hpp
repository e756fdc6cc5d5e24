#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptm {

// Caller supplied an argument outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration or instruction does not fit the machine it is used with.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed text input. `line` is 1-based, 0 when not tied to a line.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& message, const std::string& source = "")
      : std::runtime_error(compose(line, message, source)), line_(line), message_(message) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string compose(std::size_t line, const std::string& message, const std::string& source) {
    if (source.empty()) return line == 0 ? message : "line " + std::to_string(line) + ": " + message;
    return line == 0 ? source + ": " + message : source + ":" + std::to_string(line) + ": " + message;
  }

  std::size_t line_;
  std::string message_;
};

}  // namespace ptm
