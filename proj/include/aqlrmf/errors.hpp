#pragma once

#include <stdexcept>
#include <string>

namespace aqlrmf {

// Bad parameters or malformed input data. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text/file content that could not be parsed; carries the 1-based location.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int row, int column)
      : ValidationError(what), row_(row), column_(column) {}
  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

// Weighted median (or similar) called with no usable weight.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Filesystem failures. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aqlrmf
