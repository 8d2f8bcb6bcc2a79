#pragma once

#include <stdexcept>
#include <string>

namespace frameguard {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented schema or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Text could not be parsed at all (malformed JSON, CSV, ...). Keeps the raw input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Remote scorer / generation endpoint failure.
class RemoteError : public Error {
 public:
  enum class Kind { Timeout, Connection, HttpStatus, MalformedPayload };

  RemoteError(Kind kind, const std::string& what, int status = 0, int attempts = 1)
      : Error(what), kind_(kind), status_(status), attempts_(attempts) {}

  Kind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }
  // Timeouts, connection failures and 5xx are worth retrying; bad payloads are not.
  bool retryable() const noexcept {
    return kind_ == Kind::Timeout || kind_ == Kind::Connection ||
           (kind_ == Kind::HttpStatus && status_ >= 500);
  }

 private:
  Kind kind_;
  int status_;
  int attempts_;
};

// Model fitting problems: singular/aliased design, singular covariance blocks.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace frameguard
