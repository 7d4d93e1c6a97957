#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dman {

// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input content; carries the 1-based line number when known.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& where, std::size_t line, const std::string& what)
      : std::runtime_error(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Invalid configuration or hyperparameter value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dman
