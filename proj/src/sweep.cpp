#include "adaptive_lqr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

using nlohmann::json;

namespace {

json FiniteOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double NumberOrNan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.at(key).get<double>();
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json RecordToJson(const RunRecord& rec) {
  json j;
  j["schema"] = kRecordSchema;
  j["T"] = rec.T;
  j["seed"] = rec.seed;
  j["replicate_id"] = rec.replicate_id;
  j["system_tag"] = rec.system_tag;
  j["coupled"] = rec.coupled;
  j["failed"] = rec.failed;
  j["failure_time"] = rec.failure_time ? json(*rec.failure_time) : json(nullptr);
  j["cost_algo"] = FiniteOrNull(rec.cost_algo);
  j["cost_oracle"] = FiniteOrNull(rec.cost_oracle);
  j["regret"] = FiniteOrNull(rec.regret);
  j["est_err_theta"] = FiniteOrNull(rec.est_err_theta);
  j["est_err_K"] = FiniteOrNull(rec.est_err_K);
  j["reset_count"] = rec.reset_count;
  if (!rec.checkpoints.empty()) {
    const CheckpointDiag& c = rec.checkpoints.front();
    j["diag"] = {
        {"lam_parallel", c.lam_parallel},
        {"lam_perp", c.lam_perp},
        {"lam_delta", c.lam_delta},
        {"decomp_residual", c.decomp_residual},
        {"dim", c.gram.rows()},
        {"gram", MatrixToJson(c.gram)},
    };
  } else {
    j["diag"] = nullptr;
  }
  return j;
}

RunRecord RecordFromJson(const json& j) {
  if (!j.is_object() || j.value("schema", "") != kRecordSchema) {
    ThrowInvalid("record: unsupported or missing schema");
  }
  RunRecord r;
  r.side = RunSide::kPaired;
  r.T = j.at("T").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.replicate_id = j.at("replicate_id").get<std::uint64_t>();
  r.system_tag = j.at("system_tag").get<std::uint64_t>();
  r.coupled = j.at("coupled").get<bool>();
  r.failed = j.at("failed").get<bool>();
  if (!j.at("failure_time").is_null()) r.failure_time = j.at("failure_time").get<std::int64_t>();
  r.cost_algo = NumberOrNan(j, "cost_algo");
  r.cost_oracle = NumberOrNan(j, "cost_oracle");
  r.regret = NumberOrNan(j, "regret");
  r.est_err_theta = NumberOrNan(j, "est_err_theta");
  r.est_err_K = NumberOrNan(j, "est_err_K");
  r.reset_count = j.at("reset_count").get<int>();
  if (j.contains("diag") && !j.at("diag").is_null()) {
    const json& dj = j.at("diag");
    CheckpointDiag c;
    c.T = r.T;
    c.cost = r.cost_algo;
    c.reset_count = r.reset_count;
    c.lam_parallel = dj.at("lam_parallel").get<double>();
    c.lam_perp = dj.at("lam_perp").get<double>();
    c.lam_delta = dj.at("lam_delta").get<double>();
    c.decomp_residual = dj.at("decomp_residual").get<double>();
    const auto dim = dj.at("dim").get<Eigen::Index>();
    c.gram = MatrixFromJson(dj.at("gram"), dim, dim, "diag.gram");
    c.est_err_theta = r.est_err_theta;
    c.est_err_K = r.est_err_K;
    r.checkpoints.push_back(std::move(c));
  }
  return r;
}

std::string RecordFileName(std::int64_t T) {
  return "records_T" + std::to_string(T) + ".jsonl";
}

SweepResult RunSweep(const ExperimentConfig& cfg, int jobs) {
  if (jobs < 1) ThrowInvalid("--jobs must be at least 1");
  const auto& ids = cfg.sweep.replicate_ids;
  std::vector<std::vector<RunRecord>> per_replicate(ids.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= ids.size()) return;
      try {
        per_replicate[i] = RunPairedReplicate(cfg.system, cfg.algo, cfg.sweep.seed,
                                              ids[i], cfg.sweep.T_grid,
                                              cfg.sweep.coupled);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(ids.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult result;
  result.replicates = ids.size();
  for (auto& recs : per_replicate) {
    if (!recs.empty() && recs.front().failed) ++result.failed_replicates;
    for (auto& r : recs) result.records.push_back(std::move(r));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return std::tie(a.T, a.seed, a.replicate_id) <
                     std::tie(b.T, b.seed, b.replicate_id);
            });
  return result;
}

void WriteSweep(const ExperimentConfig& cfg, const SweepResult& result,
                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  std::map<std::int64_t, std::vector<const RunRecord*>> by_T;
  for (const RunRecord& r : result.records) by_T[r.T].push_back(&r);

  json files = json::array();
  for (const auto& [T, recs] : by_T) {
    const std::string name = RecordFileName(T);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + (dir / name).string());
    for (const RunRecord* r : recs) out << RecordToJson(*r).dump() << '\n';
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + (dir / name).string());
    files.push_back({{"T", T}, {"file", name}, {"count", recs.size()}});
  }

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["config_hash"] = ConfigHash(cfg);
  manifest["tool_version"] = kToolVersion;
  manifest["records"] = files;
  manifest["replicates"] = result.replicates;
  manifest["failed_replicates"] = result.failed_replicates;
  manifest["config"] = ToJson(cfg);
  manifest["created_at"] = UtcTimestamp();
  std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

std::vector<RunRecord> LoadRecords(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kInsufficientData, dir.string() + " is not a results directory");
  }
  static const std::regex kPattern(R"(records_T(\d+)\.jsonl)");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() &&
        std::regex_match(entry.path().filename().string(), kPattern)) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> records;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorKind::kIo, "cannot read " + p.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        records.push_back(RecordFromJson(json::parse(line)));
      } catch (const json::exception& e) {
        ThrowInvalid("malformed record in " + p.string() + ": " + e.what());
      }
    }
  }
  if (records.empty()) {
    throw Error(ErrorKind::kInsufficientData, "no records found in " + dir.string());
  }
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.T, a.seed, a.replicate_id) < std::tie(b.T, b.seed, b.replicate_id);
  });
  return records;
}

}  // namespace adaptive_lqr
