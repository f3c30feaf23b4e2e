#pragma once

#include <stdexcept>
#include <string>

namespace namerace {

/// Base for every failure caused by input data or invalid arguments.
/// The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input file. Messages carry "path:line" context when known.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Model container could not be decoded (bad magic, version, checksum, truncation, shapes).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numeric value became NaN or infinite where it must stay finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace namerace
