#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace branchpde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series or quadrature failed to reach the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double partial_value, double error_bound)
      : Error(what), partial_value_(partial_value), error_bound_(error_bound) {}

  double partial_value() const noexcept { return partial_value_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double partial_value_;
  double error_bound_;
};

/// An integral that was required to be finite diverges.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A numerical decision landed inside its guard band.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate a shape condition required by a bound.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// A Lipschitz constant was required but the terminal condition has none.
class NotLipschitzError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}

  /// Byte offset of the offending token in the source text.
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Variable index exceeds the spatial dimension, or a point has the wrong size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Runtime failure while evaluating an expression (division by zero, ...).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A tree outgrew its particle or generation budget. The estimate is aborted.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& what, std::size_t completed_trees)
      : Error(what), completed_trees_(completed_trees) {}

  /// Number of trees (lowest stream ids first) that finished before the failing one.
  std::size_t completed_trees() const noexcept { return completed_trees_; }

 private:
  std::size_t completed_trees_;
};

/// Derivative marks need t < T; at t = T the weight is 0/0.
class DegenerateDerivativeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model description or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace branchpde
