#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emodist {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad input data (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed document; `offset()` is the byte position where parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A single record failed validation. `record()` is a 0-based record index
/// for JSON inputs and a 1-based line number for line-oriented files.
class RecordError : public DataError {
 public:
  RecordError(std::size_t record, const std::string& reason)
      : DataError("record " + std::to_string(record) + ": " + reason), record_(record), reason_(reason) {}
  std::size_t record() const noexcept { return record_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t record_;
  std::string reason_;
};

/// A record that was skipped by a tolerant loader.
struct RecordIssue {
  std::size_t record = 0;
  std::string reason;
};

}  // namespace emodist
