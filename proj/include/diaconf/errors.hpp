#pragma once

#include <stdexcept>
#include <string>

namespace diaconf {

// Base type for every error this library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Requested an operation whose inputs cannot support it (e.g. the spectral
// confidence method on a hypothesis that has no spectral basis).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Iterative numerical routine failed to converge within its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace diaconf
