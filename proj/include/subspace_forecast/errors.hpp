#ifndef SUBSPACE_FORECAST_ERRORS_HPP
#define SUBSPACE_FORECAST_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subspace_forecast {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A value outside the mathematical domain of an operation (non-positive price, non-PSD covariance).
class DomainError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  InsufficientDataError(const std::string& what, std::size_t required, std::size_t available)
      : Error(what + " (required " + std::to_string(required) + ", available " +
              std::to_string(available) + ")"),
        required_(required), available_(available) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

private:
  std::size_t required_;
  std::size_t available_;
};

/// Bad argument: dimension mismatch, out-of-range count.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// A matrix that had to be inverted is numerically singular.
class IllConditionedError : public Error {
public:
  IllConditionedError(const std::string& what, double condition)
      : Error(what + " (condition number " + std::to_string(condition) + ")"), condition_(condition) {}

  double condition_number() const noexcept { return condition_; }

private:
  double condition_;
};

/// No subspace dimension satisfies the condition-number cap.
class NoFeasibleSubspaceError : public Error {
public:
  NoFeasibleSubspaceError(double cap, double min_achievable)
      : Error("no subspace satisfies condition cap " + std::to_string(cap) +
              " (minimum achievable " + std::to_string(min_achievable) + ")"),
        cap_(cap), min_achievable_(min_achievable) {}

  double cap() const noexcept { return cap_; }
  double min_achievable() const noexcept { return min_achievable_; }

private:
  double cap_;
  double min_achievable_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace subspace_forecast

#endif  // SUBSPACE_FORECAST_ERRORS_HPP
