#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rqs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class ArgumentError : public Error {
public:
  using Error::Error;
};

/// The request exceeds the configured size limits.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Conditioning on an outcome whose probability is effectively zero.
class DegenerateSliceError : public Error {
public:
  using Error::Error;
};

/// Too few post-selected samples to form an estimate.
class InsufficientSamplesError : public Error {
public:
  InsufficientSamplesError(std::size_t yield, std::size_t required)
      : Error("post-selection kept " + std::to_string(yield) +
              " samples, need at least " + std::to_string(required)),
        yield_(yield), required_(required) {}

  std::size_t yield() const noexcept { return yield_; }
  std::size_t required() const noexcept { return required_; }

private:
  std::size_t yield_;
  std::size_t required_;
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line number; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace rqs
