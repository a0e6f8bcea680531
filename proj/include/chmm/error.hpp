#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an index (state, bin, chain) is outside the model's shape.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A chain likelihood collapsed to zero, so gradients and re-estimation are
/// undefined for this (params, observations) pair.
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Input text could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace chmm
