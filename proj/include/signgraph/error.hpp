#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace signgraph {

/// Coarse error category; the CLI maps it to an exit code and the HTTP
/// layer to a status code.
enum class ErrorKind {
  unknown_value,
  syntax,
  format,
  validation,
  not_found,
  conflict,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::unknown_value: return "unknown-value";
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::format: return "format";
    case ErrorKind::validation: return "validation";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::io: return "io";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A value that is not a member of a closed vocabulary.
class VocabularyError : public Error {
 public:
  VocabularyError(std::string vocabulary, std::string value)
      : Error(ErrorKind::unknown_value,
              "unknown value '" + value + "' for vocabulary '" + vocabulary + "'"),
        vocabulary_(std::move(vocabulary)),
        value_(std::move(value)) {}

  const std::string& vocabulary() const noexcept { return vocabulary_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::string vocabulary_;
  std::string value_;
};

/// Error that carries a position: a byte offset for query text, or a byte
/// offset / line number for files.
class PositionedError : public Error {
 public:
  PositionedError(ErrorKind kind, std::size_t position, const std::string& message)
      : Error(kind, message + " (at " + std::to_string(position) + ")"),
        position_(position),
        detail_(message) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

}  // namespace signgraph
