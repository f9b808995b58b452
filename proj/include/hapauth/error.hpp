#pragma once

#include <stdexcept>
#include <string>

namespace hapauth {

// Invalid configuration or parameter value. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shape/dimension mismatch between tensors or matrices.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Anything wrong with input data. The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : DataError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class OrderingError : public DataError {
 public:
  using DataError::DataError;
};

class EmptyTraceError : public DataError {
 public:
  using DataError::DataError;
};

class TooShortError : public DataError {
 public:
  using DataError::DataError;
};

// Dataset does not cover what an experiment needs (missing groups, too few trials).
class CoverageError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace hapauth
