#pragma once

#include <stdexcept>
#include <string>

namespace kfield {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes (see tools/kernel_field.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed text whose shape does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Kalman update could not be formed; `condition` is the reciprocal
/// condition estimate of the innovation covariance.
class FilterError : public NumericalError {
 public:
  FilterError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Controller synthesis failed (non-convergence or rank deficit).
class SynthesisError : public NumericalError {
 public:
  SynthesisError(const std::string& what, int rank_deficit = 0)
      : NumericalError(what), rank_deficit_(rank_deficit) {}
  int rank_deficit() const { return rank_deficit_; }

 private:
  int rank_deficit_;
};

class PlacementError : public NumericalError {
 public:
  PlacementError(const std::string& what, int best_rank)
      : NumericalError(what), best_rank_(best_rank) {}
  int best_rank() const { return best_rank_; }

 private:
  int best_rank_;
};

}  // namespace kfield
