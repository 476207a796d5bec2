#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptive_lqr/adaptive_control.hpp"
#include "adaptive_lqr/control_core.hpp"

namespace adaptive_lqr {

inline constexpr const char* kConfigSchema = "adaptive-lqr-config/1";
inline constexpr const char* kSeedEnvVar = "ADAPTIVE_LQR_SEED";

struct SweepConfig {
  std::vector<std::int64_t> T_grid;            // strictly increasing, >= 2
  std::vector<std::uint64_t> replicate_ids;    // "seeds": count or list
  std::uint64_t seed = 0;                      // base seed of every stream
  bool coupled = true;
};

struct ExperimentConfig {
  SystemSpec system;
  AlgoConfig algo;
  SweepConfig sweep;
  std::string output_dir = "results";
};

/// Parses and validates a config document. Matrices are row-major arrays whose
/// lengths must match the declared n and d; missing optional fields take their
/// defaults. Throws kInvalidInput on any schema or validation failure.
ExperimentConfig ParseConfig(const nlohmann::json& doc);
ExperimentConfig LoadConfig(const std::string& path);

// Simulation commands need rho(A + B K0) < 1; throws kInvalidInput otherwise.
void RequireStabilizingK0(const ExperimentConfig& cfg);

// Applies ADAPTIVE_LQR_SEED (if set) to sweep.seed.
void ApplySeedOverride(ExperimentConfig& cfg);

// Fully resolved form: every field explicit, seeds as an explicit list.
nlohmann::json ToJson(const ExperimentConfig& cfg);

// SHA-256 (hex) of the compact dump of ToJson(cfg).
std::string ConfigHash(const ExperimentConfig& cfg);

// Row-major helpers shared by config and record serialization.
nlohmann::json MatrixToJson(const Eigen::MatrixXd& M);
Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j, Eigen::Index rows,
                               Eigen::Index cols, const char* name);

std::string Sha256Hex(const std::string& data);

}  // namespace adaptive_lqr
