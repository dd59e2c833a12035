#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rfvqa {

/// Coarse error classes. The CLI maps these onto process exit codes.
enum class ErrorCategory {
  InvalidArgument,
  Config,
  MissingArtifact,
  Transport,
  Auth,
  Data,
  Io,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCategory::InvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::string& path)
      : Error(ErrorCategory::MissingArtifact, "missing artifact: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorCategory::Transport, what) {}
};

class AuthError : public Error {
 public:
  explicit AuthError(const std::string& what) : Error(ErrorCategory::Auth, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

/// Malformed input document; `line` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCategory::Data,
              line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The real trace did not contain enough rising crossings for the drawn
/// period count. Callers lengthen the signal or change the hysteresis.
class InsufficientCrossings : public Error {
 public:
  InsufficientCrossings(std::size_t needed, std::size_t found)
      : Error(ErrorCategory::Data, "insufficient zero crossings: need " +
                                       std::to_string(needed) + ", found " +
                                       std::to_string(found)),
        needed_(needed),
        found_(found) {}
  std::size_t needed() const noexcept { return needed_; }
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t needed_;
  std::size_t found_;
};

}  // namespace rfvqa
