#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace coupling {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Mixing class-level and package-level graphs, or feeding the wrong level.
class GranularityError : public Error {
public:
  using Error::Error;
};

// Malformed binary input (class files, archives). Carries the byte offset
// at which decoding failed.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

// Class file whose major version exceeds the configured ceiling.
class UnsupportedVersionError : public Error {
public:
  UnsupportedVersionError(unsigned major, unsigned ceiling)
      : Error("unsupported class file major version " + std::to_string(major) +
              " (ceiling " + std::to_string(ceiling) + ")"),
        major_(major) {}

  unsigned major_version() const noexcept { return major_; }

private:
  unsigned major_;
};

// Malformed text record (trace lines, CSV rows, config lines).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

  // Same error, message prefixed with where the input came from.
  static ParseError in_source(const std::string& source, const ParseError& e) {
    return ParseError(source + ": " + e.what(), e.line(), 0);
  }

private:
  ParseError(std::string full, std::size_t line, int)
      : Error(std::move(full)), line_(line) {}

  std::size_t line_;
};

// A comparison over fewer than two modules.
class DegenerateComparisonError : public Error {
public:
  using Error::Error;
};

// Failure attributed to one named input (a file, an archive member).
class InputError : public Error {
public:
  InputError(std::string source, const std::string& what)
      : Error(source + ": " + what), source_(std::move(source)) {}

  const std::string& source() const noexcept { return source_; }

private:
  std::string source_;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace coupling
