#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corrmon {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (non-PSD covariance, a_ii < 1, zero variance weight, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sensor index outside [0, M).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// c^T P c fell below the pivot threshold in the covariance recursion.
class SingularPivot : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// low_rank_reduce was handed a full-rank matrix.
class FullRank : public Error {
 public:
  using Error::Error;
};

/// The guarantee-ratio denominator vanished (near-perfect correlation).
class DegenerateBound : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed its schedule budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration. Carries the offending field and,
/// when known, the 1-based line number in the source file.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : Error(format(field, line, what)), field_(std::move(field)), line_(line), detail_(what) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }
  /// The message without the location prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(const std::string& field, std::size_t line,
                            const std::string& what) {
    std::string msg = "config";
    if (line > 0) msg += ":" + std::to_string(line);
    if (!field.empty()) msg += ": field '" + field + "'";
    return msg + ": " + what;
  }

  std::string field_;
  std::size_t line_ = 0;
  std::string detail_;
};

}  // namespace corrmon
