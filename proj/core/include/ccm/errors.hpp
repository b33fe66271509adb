#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A gradient or curvature was requested where the smooth part is +inf.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

class NonpositiveCurvature : public Error {
 public:
  using Error::Error;
};

// The one-dimensional search could not find a sign change of the derivative.
class NoBracket : public Error {
 public:
  using Error::Error;
};

class MaxIterations : public Error {
 public:
  using Error::Error;
};

class NoFiniteStart : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPSD : public Error {
 public:
  using Error::Error;
};

// Problem data rejected by validation (zero column, lambda <= 0, ...).
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonFinite : public Error {
 public:
  NonFinite(std::size_t row, std::size_t col)
      : Error("non-finite entry at row " + std::to_string(row) + ", column " +
              std::to_string(col)),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace ccm
