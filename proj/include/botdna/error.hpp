#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace botdna {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file violates the documented schema. line() is 1-based, 0 when the
// failure is not tied to a single line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced (or consumed) by a numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace botdna
