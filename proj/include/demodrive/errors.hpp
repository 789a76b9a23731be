#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace demodrive {

// Base for every error the library raises. Callers that only need a
// diagnostic can catch this; tests match on the concrete subclass.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad argument value (non-finite input, non-positive duration, ...).
class ArgumentError : public Error {
public:
  using Error::Error;
};

// Value outside its admissible range (spawn arc beyond the track length, ...).
class RangeError : public Error {
public:
  using Error::Error;
};

// Operation not valid in the current state (stepping a finished episode).
class StateError : public Error {
public:
  using Error::Error;
};

// Vector or matrix dimensions that do not line up.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Non-finite loss or gradient encountered while optimizing.
class TrainingError : public Error {
public:
  using Error::Error;
};

// Demonstration data unusable for the requested operation.
class DatasetError : public Error {
public:
  using Error::Error;
};

// A record failed an invariant check after it was parsed.
class ValidationError : public Error {
public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
  using Error::Error;
};

// Persisted file carries a format_version this build does not understand.
class VersionError : public Error {
public:
  using Error::Error;
};

// Persisted file is truncated or structurally damaged.
class CorruptError : public Error {
public:
  using Error::Error;
};

// Malformed text; carries the 1-based line number that failed to parse.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace demodrive
