#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace s3rc {

// Base class for all library errors.  CLI maps subclasses to exit codes:
// input/config problems -> 2, numerical failures -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operands whose shapes are mutually inconsistent.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Input that is structurally valid but numerically unusable
// (zero columns where unit norm is required, empty classes, ...).
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// Malformed file content.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Invalid option values or option combinations.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical breakdown inside an algorithm (singular systems, NaN/Inf).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// An iterative method hit its iteration cap before meeting its
// optimality test.  Carries the best iterate so callers can inspect it.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& msg, Eigen::VectorXd best)
      : Error(msg), best_iterate(std::move(best)) {}
  Eigen::VectorXd best_iterate;
};

}  // namespace s3rc
