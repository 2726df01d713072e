#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conducta {

/// Bad input or configuration. Surfaces as exit status 2 in the CLI.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed line in a text input file.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A numerical procedure could not complete (factorization failure, no
/// feasible set, ...). Surfaces as exit status 1 in the CLI.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conducta
