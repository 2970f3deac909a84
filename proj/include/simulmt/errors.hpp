#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace simulmt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition (bad token, zero length, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An action sequence breaks a stream-log rule. `index` is the offending
/// action position when one exists.
class InvalidLog : public Error {
 public:
  InvalidLog(const std::string& what, std::optional<std::size_t> index)
      : Error(what), index_(index) {}
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

/// A serialized record could not be decoded.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Average anticipation over zero links is undefined.
class EmptyAlignment : public Error {
 public:
  EmptyAlignment() : Error("alignment has no links; AA is undefined") {}
};

/// Normalized erasure with an empty final hypothesis is undefined.
class UndefinedNE : public Error {
 public:
  UndefinedNE() : Error("final hypothesis is empty; NE is undefined") {}
};

/// Input data problem tied to a file position.
class DataError : public Error {
 public:
  DataError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit DataError(const std::string& what) : Error(what) {}
};

}  // namespace simulmt
