#pragma once

#include <stdexcept>
#include <string>

namespace gain {

// Shapes of operands do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An argument is outside the operation's domain (empty list, bad rate, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// NaN or infinity where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file does not match the expected schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input parses but violates a domain invariant (span range, h == t, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint cannot be loaded into the requested model.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gain
