#pragma once

#include <stdexcept>
#include <string>

namespace assocprf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file could not be parsed; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Index file failures. Each corruption mode has its own type so callers can
// tell a stale file from a damaged one.
class IndexFormatError : public Error {
 public:
  using Error::Error;
};

class IndexVersionError : public IndexFormatError {
 public:
  using IndexFormatError::IndexFormatError;
};

class IndexChecksumError : public IndexFormatError {
 public:
  using IndexFormatError::IndexFormatError;
};

class IndexTruncatedError : public IndexFormatError {
 public:
  using IndexFormatError::IndexFormatError;
};

/// The feedback set is empty, so no association matrix can be built.
class NoExpansionError : public Error {
 public:
  using Error::Error;
};

}  // namespace assocprf
