#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncsim {

/// Mismatched or colliding tensor structure.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An argument outside its documented domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An estimator was asked to work without data.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ncsim
