#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace detcensus {

/// A configured cap (forms, points) was hit; the run is aborted, never truncated.
class ResourceLimitExceeded : public std::runtime_error {
 public:
  ResourceLimitExceeded(const std::string& what, std::uint64_t limit)
      : std::runtime_error(what), limit_(limit) {}
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t limit_;
};

/// An exact post-condition check failed.
class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: JSON, CSV or a command-line value.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace detcensus
