#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ooro {

enum class ErrorKind {
  IndexOutOfRange,
  SelfOcclusion,
  InconsistentMatrix,
  FileNotFound,
  MalformedAnnotation,
  DanglingReference,
  UnmatchedImageId,
  LengthMismatch,
  DegeneratePolygon,
  MissingMask,
  EmptyCategoryList,
  InvalidImage,
  CacheMiss,
  TransportError,
  RateLimited,
  MalformedResponse,
  EmptyEvaluation,
  Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every recoverable failure in the library is an `Error` tagged with its kind,
/// so callers can branch on `kind()` without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised on HTTP 429; carries the server's retry-after hint in seconds (0 if absent).
class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& what, int retry_after_seconds)
      : Error(ErrorKind::RateLimited, what), retry_after_(retry_after_seconds) {}

  int retry_after() const noexcept { return retry_after_; }

 private:
  int retry_after_;
};

}  // namespace ooro
