#pragma once

#include <stdexcept>
#include <string>

namespace qaea {

/// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a domain invariant (duplicate id, negative grade, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller passed an argument outside an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Text could not be parsed. `line` is 1-based when the input was line-oriented, 0 otherwise.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Network-level failure talking to a backend after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Backend answered with a non-success status.
class BackendError : public Error {
 public:
  BackendError(int status, std::string body_excerpt)
      : Error("backend returned HTTP " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        body_(std::move(body_excerpt)) {}
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Backend answered successfully but produced no text.
class EmptyOutputError : public Error {
 public:
  using Error::Error;
};

/// Persisted artifact is unreadable. `offset` is the byte (or line) position of the failure.
class LoadError : public Error {
 public:
  LoadError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A theory checker was handed an instance that does not meet the theorem's hypotheses.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qaea
