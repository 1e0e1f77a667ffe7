#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dwi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or configuration. The CLI maps these to exit status 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::size_t row, std::size_t column, const std::string& what)
      : ValidationError(file + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failure of a numerical procedure on valid input. Exit status 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best, double grad_norm)
      : NumericalError(what), best_(std::move(best)), grad_norm_(grad_norm) {}
  const std::vector<double>& best_iterate() const { return best_; }
  double gradient_norm() const { return grad_norm_; }

 private:
  std::vector<double> best_;
  double grad_norm_;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, std::vector<int> coordinates)
      : NumericalError(what), coordinates_(std::move(coordinates)) {}
  const std::vector<int>& coordinates() const { return coordinates_; }

 private:
  std::vector<int> coordinates_;
};

class NoRiskNeutralMeasure : public NumericalError {
 public:
  NoRiskNeutralMeasure(const std::string& what, double lo, double hi)
      : NumericalError(what), lo_(lo), hi_(hi) {}
  double lower() const { return lo_; }
  double upper() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace dwi
