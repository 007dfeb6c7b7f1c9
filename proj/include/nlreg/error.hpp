#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlreg {

/// Machine-readable failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  InvalidInput,
  DegenerateData,
  NumericalFailure,
  ParseError,
  UndefinedMetric,
  ShapeMismatch,
  Io,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error(ErrorCategory::InvalidInput, what) {}
};

class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& what)
      : Error(ErrorCategory::DegenerateData, what) {}
};

class NumericalFailureError : public Error {
 public:
  explicit NumericalFailureError(const std::string& what)
      : Error(ErrorCategory::NumericalFailure, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(ErrorCategory::ParseError,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  /// 1-based line number, or 0 when the failure is not tied to a line.
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what)
      : Error(ErrorCategory::UndefinedMetric, what) {}
};

class ShapeMismatchError : public Error {
 public:
  explicit ShapeMismatchError(const std::string& what)
      : Error(ErrorCategory::ShapeMismatch, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

}  // namespace nlreg
