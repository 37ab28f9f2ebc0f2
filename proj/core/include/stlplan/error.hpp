#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlplan {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed spec-source text. Carries a 1-based line/column position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A temporal window that maps to no sample of the trace.
class EmptyWindowError : public Error {
 public:
  using Error::Error;
};

class UnknownChannelError : public Error {
 public:
  explicit UnknownChannelError(const std::string& channel)
      : Error("unknown channel '" + channel + "'"), channel_(channel) {}

  const std::string& channel() const noexcept { return channel_; }

 private:
  std::string channel_;
};

/// Invalid or numerically unusable model / configuration data.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (CSV, JSON).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stlplan
