#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace origins {

// Root of all errors raised by the library. The CLI maps subclasses onto
// exit codes: IoError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `row` is the 1-based data row (0 when the problem is
// not tied to a row, e.g. a missing header column).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// A domain invariant does not hold (unreachable node, singular covariance,
// empty conflict year, improper policy, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// A requested year, port or other key is not present in the loaded data.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace origins
