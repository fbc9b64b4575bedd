#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsclust {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse"; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

class ParameterError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parameter"; }
};

// Raised by QR / range finders when the input has no numerical range.
class EmptyRangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "empty_range"; }
};

// Iterative method did not meet its tolerance. Carries the last iterate so
// callers that can live with an approximate answer may still use it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_values,
                   std::size_t iterations)
      : Error(what), last_values_(std::move(last_values)), iterations_(iterations) {}
  const std::vector<double>& last_values() const noexcept { return last_values_; }
  double last_value() const noexcept { return last_values_.empty() ? 0.0 : last_values_.front(); }
  std::size_t iterations() const noexcept { return iterations_; }
  const char* kind() const noexcept override { return "convergence"; }

 private:
  std::vector<double> last_values_;
  std::size_t iterations_;
};

}  // namespace rsclust
