#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace adaptive_lqr {

enum class ErrorKind {
  kInvalidInput,
  kNotStabilizable,
  kNoData,
  kInsufficientData,
  kNumeric,
  kDiverged,
  kIo,
};

const char* ToString(ErrorKind kind);

// Base exception for every failure raised by the library. The kind drives the
// CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when the simulated state norm crosses the divergence tripwire.
class DivergedError : public Error {
 public:
  DivergedError(std::int64_t failure_time, double state_norm);

  std::int64_t failure_time() const { return failure_time_; }
  double state_norm() const { return state_norm_; }

 private:
  std::int64_t failure_time_;
  double state_norm_;
};

[[noreturn]] void ThrowInvalid(const std::string& what);

}  // namespace adaptive_lqr
