#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

// Documented process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitInvalidConfig = 2,
  kExitInsufficientData = 3,
  kExitNumericFailure = 4,
};

int ExitCodeFor(ErrorKind kind);

struct GenSystemOptions {
  int n = 1;
  int d = 1;
  double spectral_radius = 0.5;
  std::uint64_t seed = 0;
};

// Random instance with rho(A) = spectral_radius, Q = R = I and K0 = 0,
// serialized as a complete experiment config.
nlohmann::json GenerateSystemConfig(const GenSystemOptions& opts);

// Each command writes its primary output to `out` and returns an exit code;
// errors escape as adaptive_lqr::Error.
int CmdDare(const std::string& config_path, bool json, std::ostream& out);
int CmdSimulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::int64_t horizon, std::uint64_t replicate_id, std::ostream& out);
int CmdSweep(const std::string& config_path, int jobs,
             const std::optional<std::string>& out_dir, std::ostream& out);
int CmdRates(const std::string& results_dir, bool json, std::ostream& out);
int CmdPlot(const std::string& results_dir, std::ostream& out);
int CmdGenSystem(const GenSystemOptions& opts, std::ostream& out);

// Full command-line front end: parses `args` (args[0] is the program name),
// dispatches, and maps errors to exit codes with a diagnostic on `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adaptive_lqr
