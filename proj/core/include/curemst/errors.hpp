#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curemst {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A column named by the CSV schema is absent from the header.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& column)
      : Error("missing column: " + column), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A data row could not be parsed. `row` is 1-based over data rows.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Data violates a domain invariant (negative time, bad status, no events).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A point estimate or plug-in variance is undefined for the data.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// A test or confidence interval cannot be formed.
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the mixture cure EM fit or its Newton solvers.
class EmError : public Error {
 public:
  using Error::Error;
};

}  // namespace curemst
