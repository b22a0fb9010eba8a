#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccs {

// Malformed expression text; offset is the byte position in the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t offset)
      : std::runtime_error(std::move(msg)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation outside an expression's domain (log of nonpositive, x/0, ...).
// Carries the offending subexpression so reports can name it.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string msg, std::string subexpr)
      : std::runtime_error(std::move(msg)), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

// Bad user input: scenario files, mismatched charts, missing sections.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure at a specific point (degenerate metric, singular solve).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Map Jacobian drops rank at a sample point; the sample is rejected.
class CriticalPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ccs
