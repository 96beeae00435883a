#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace insideout {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments to a library call (bad sizes, non-finite values, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Syntax error in a trace/dataset/report file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A well-formed file or object that breaks a documented invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string rule, const std::string& what)
      : Error(what), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

/// The trace holds too few epochs to build the requested system.
class InsufficientTrace : public Error {
 public:
  using Error::Error;
};

/// Closed-form recovery divided by a (numerically) zero bias step.
class DegenerateDivision : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace insideout
