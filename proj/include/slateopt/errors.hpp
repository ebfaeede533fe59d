#pragma once

#include <stdexcept>
#include <string>

namespace slateopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied value (empty slate, k out of range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Shape disagreement between vectors/matrices/schemas.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operation not valid in the current state (e.g. all indices masked).
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss/gradient or other numeric breakdown.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace slateopt
