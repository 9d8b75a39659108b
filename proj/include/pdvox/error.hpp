#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdvox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header missing, permuted, or misspelled. `column()` is the first expected
/// column that did not match.
class SchemaError : public Error {
 public:
  SchemaError(std::string column, const std::string& message)
      : Error(message), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Malformed data cell. `row()` is the 1-based line number in the file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& message) : Error(message), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Violated precondition on shapes or arguments.
class ContractError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class StratificationError : public Error {
 public:
  using Error::Error;
};

/// Training labels contain a single class.
class DegenerateTargetError : public Error {
 public:
  using Error::Error;
};

/// SMOTE needs at least two minority rows.
class CannotInterpolateError : public Error {
 public:
  using Error::Error;
};

/// A metric that has no value for the given input (e.g. AUC with one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An error raised inside one pipeline stage, re-thrown with the stage name.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace pdvox
