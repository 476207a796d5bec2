#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptive_lqr/config.hpp"
#include "adaptive_lqr/lqr_sim.hpp"

namespace adaptive_lqr {

inline constexpr const char* kRecordSchema = "adaptive-lqr-record/1";
inline constexpr const char* kManifestSchema = "adaptive-lqr-manifest/1";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json RecordToJson(const RunRecord& rec);
RunRecord RecordFromJson(const nlohmann::json& j);

// records_T<T>.jsonl
std::string RecordFileName(std::int64_t T);

struct SweepResult {
  std::vector<RunRecord> records;  // sorted by (T, replicate_id)
  std::size_t replicates = 0;
  std::size_t failed_replicates = 0;
};

/// Runs every replicate of cfg.sweep on `jobs` worker threads. Each replicate
/// is one paired (algorithm, oracle) simulation to max(T_grid) with
/// checkpoints on the grid. Output order does not depend on `jobs`.
SweepResult RunSweep(const ExperimentConfig& cfg, int jobs);

// Writes one JSONL file per horizon plus manifest.json into `dir`.
void WriteSweep(const ExperimentConfig& cfg, const SweepResult& result,
                const std::filesystem::path& dir);

// Reads every records_T*.jsonl in `dir`. Throws kInsufficientData if there
// are none.
std::vector<RunRecord> LoadRecords(const std::filesystem::path& dir);

}  // namespace adaptive_lqr
