#include "adaptive_lqr/errors.hpp"

#include <sstream>

namespace adaptive_lqr {

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid-input";
    case ErrorKind::kNotStabilizable:
      return "not-stabilizable";
    case ErrorKind::kNoData:
      return "no-data";
    case ErrorKind::kInsufficientData:
      return "insufficient-data";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kDiverged:
      return "diverged";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

namespace {
std::string DivergedMessage(std::int64_t t, double norm) {
  std::ostringstream os;
  os << "state norm " << norm << " exceeded divergence threshold at t=" << t;
  return os.str();
}
}  // namespace

DivergedError::DivergedError(std::int64_t failure_time, double state_norm)
    : Error(ErrorKind::kDiverged, DivergedMessage(failure_time, state_norm)),
      failure_time_(failure_time),
      state_norm_(state_norm) {}

void ThrowInvalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, what);
}

}  // namespace adaptive_lqr
