#pragma once

#include <stdexcept>
#include <string>

namespace obswin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Line and column are 1-based.
class ParseError : public Error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity, NonConstantExponent };

  ParseError(Kind kind, std::string message, int line, int column);

  Kind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  /// Message without the location prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  int line_;
  int column_;
  std::string detail_;
};

/// Evaluation hit a point outside the natural domain of some subtree
/// (division by zero, log of a nonpositive number, ...).
class DomainError : public Error {
 public:
  DomainError(std::string message, std::string subtree);

  /// Printed form of the offending subexpression.
  const std::string& subtree() const noexcept { return subtree_; }

 private:
  std::string subtree_;
};

/// Invalid system description file.
class SpecError : public Error {
 public:
  enum class Kind { Format, DimensionMismatch, InvalidBox, UndeclaredParameter };

  SpecError(Kind kind, std::string message, int line);

  Kind kind() const noexcept { return kind_; }
  /// 1-based line of the spec file, 0 when not tied to a line.
  int line() const noexcept { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// Violated precondition of an analysis routine (bad grid, bad plan, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A query outside the stored range (time outside a trajectory, r outside a
/// K-function's domain).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// An analysis could not produce any result (every sample excluded, every
/// start escaped, ...).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace obswin
