#include "adaptive_lqr/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

using nlohmann::json;

namespace {

const json& Require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) {
    ThrowInvalid(std::string("config: missing field ") + where + "." + key);
  }
  return obj.at(key);
}

double NumberField(const json& obj, const char* key, const char* where) {
  const json& v = Require(obj, key, where);
  if (!v.is_number()) ThrowInvalid(std::string("config: ") + where + "." + key + " must be a number");
  return v.get<double>();
}

double NumberOr(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) ThrowInvalid(std::string("config: ") + key + " must be a number");
  return obj.at(key).get<double>();
}

std::int64_t IntegerField(const json& v, const char* name) {
  if (!v.is_number_integer()) ThrowInvalid(std::string("config: ") + name + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace

json MatrixToJson(const Eigen::MatrixXd& M) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  }
  return arr;
}

Eigen::MatrixXd MatrixFromJson(const json& j, Eigen::Index rows,
                               Eigen::Index cols, const char* name) {
  if (!j.is_array()) ThrowInvalid(std::string("config: ") + name + " must be an array");
  if (static_cast<Eigen::Index>(j.size()) != rows * cols) {
    ThrowInvalid(std::string("config: ") + name + " must have " +
                 std::to_string(rows * cols) + " entries, got " +
                 std::to_string(j.size()));
  }
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& v = j.at(static_cast<std::size_t>(i * cols + k));
      if (!v.is_number()) ThrowInvalid(std::string("config: ") + name + " entries must be numbers");
      M(i, k) = v.get<double>();
    }
  }
  return M;
}

ExperimentConfig ParseConfig(const json& doc) {
  if (!doc.is_object()) ThrowInvalid("config: top level must be an object");
  if (doc.contains("schema") && doc.at("schema") != kConfigSchema) {
    ThrowInvalid("config: unsupported schema " + doc.at("schema").dump());
  }
  const std::int64_t n = IntegerField(Require(doc, "n", "config"), "n");
  const std::int64_t d = IntegerField(Require(doc, "d", "config"), "d");
  if (n < 1 || d < 1) ThrowInvalid("config: n and d must be positive");

  ExperimentConfig cfg;
  const json& sys = Require(doc, "system", "config");
  cfg.system.A = MatrixFromJson(Require(sys, "A", "system"), n, n, "system.A");
  cfg.system.B = MatrixFromJson(Require(sys, "B", "system"), n, d, "system.B");
  cfg.system.Q = MatrixFromJson(Require(sys, "Q", "system"), n, n, "system.Q");
  cfg.system.R = MatrixFromJson(Require(sys, "R", "system"), d, d, "system.R");
  cfg.system.sigma_eps = NumberField(sys, "sigma_eps", "system");
  cfg.system.x0 = sys.contains("x0")
                      ? Eigen::VectorXd(MatrixFromJson(sys.at("x0"), n, 1, "system.x0"))
                      : Eigen::VectorXd::Zero(n);
  cfg.system.Validate();

  const json& algo = Require(doc, "algo", "config");
  cfg.algo.K0 = MatrixFromJson(Require(algo, "K0", "algo"), d, n, "algo.K0");
  cfg.algo.C_x = NumberField(algo, "C_x", "algo");
  cfg.algo.C_K = NumberField(algo, "C_K", "algo");
  cfg.algo.sigma_eta = NumberField(algo, "sigma_eta", "algo");
  cfg.algo.rank_tol = NumberOr(algo, "rank_tol", cfg.algo.rank_tol);
  cfg.algo.dare_tol = NumberOr(algo, "dare_tol", cfg.algo.dare_tol);
  cfg.algo.estimate_margin = NumberOr(algo, "estimate_margin", cfg.algo.estimate_margin);
  if (algo.contains("dare_max_iters")) {
    cfg.algo.dare_max_iters =
        static_cast<int>(IntegerField(algo.at("dare_max_iters"), "algo.dare_max_iters"));
  }
  cfg.algo.Validate(static_cast<int>(n), static_cast<int>(d));

  const json& sweep = Require(doc, "sweep", "config");
  const json& grid = Require(sweep, "T_grid", "sweep");
  if (!grid.is_array() || grid.empty()) ThrowInvalid("config: sweep.T_grid must be a non-empty array");
  for (const json& v : grid) {
    const std::int64_t T = IntegerField(v, "sweep.T_grid entry");
    if (T < 2) ThrowInvalid("config: sweep.T_grid entries must be >= 2");
    if (!cfg.sweep.T_grid.empty() && T <= cfg.sweep.T_grid.back()) {
      ThrowInvalid("config: sweep.T_grid must be strictly increasing");
    }
    cfg.sweep.T_grid.push_back(T);
  }
  const json& seeds = Require(sweep, "seeds", "sweep");
  if (seeds.is_number_integer()) {
    const std::int64_t count = seeds.get<std::int64_t>();
    if (count < 1) ThrowInvalid("config: sweep.seeds must be positive");
    for (std::int64_t i = 0; i < count; ++i) {
      cfg.sweep.replicate_ids.push_back(static_cast<std::uint64_t>(i));
    }
  } else if (seeds.is_array() && !seeds.empty()) {
    for (const json& v : seeds) {
      if (!v.is_number_unsigned()) ThrowInvalid("config: sweep.seeds entries must be non-negative integers");
      cfg.sweep.replicate_ids.push_back(v.get<std::uint64_t>());
    }
    auto sorted = cfg.sweep.replicate_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      ThrowInvalid("config: sweep.seeds entries must be distinct");
    }
  } else {
    ThrowInvalid("config: sweep.seeds must be a positive count or a non-empty list");
  }
  if (sweep.contains("seed")) {
    if (!sweep.at("seed").is_number_unsigned()) ThrowInvalid("config: sweep.seed must be a non-negative integer");
    cfg.sweep.seed = sweep.at("seed").get<std::uint64_t>();
  }
  if (sweep.contains("coupled")) {
    if (!sweep.at("coupled").is_boolean()) ThrowInvalid("config: sweep.coupled must be a boolean");
    cfg.sweep.coupled = sweep.at("coupled").get<bool>();
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) ThrowInvalid("config: output_dir must be a string");
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    ThrowInvalid("config " + path + " is not valid JSON: " + e.what());
  }
  return ParseConfig(doc);
}

void RequireStabilizingK0(const ExperimentConfig& cfg) {
  if (!CheckStabilizing(cfg.system.A, cfg.system.B, cfg.algo.K0, 0.0)) {
    ThrowInvalid("config: K0 does not stabilize the system (rho(A + B K0) >= 1)");
  }
}

void ApplySeedOverride(ExperimentConfig& cfg) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0' || env[0] == '-') {
    ThrowInvalid(std::string(kSeedEnvVar) + " must be a non-negative integer");
  }
  cfg.sweep.seed = v;
}

json ToJson(const ExperimentConfig& cfg) {
  json doc;
  doc["schema"] = kConfigSchema;
  doc["n"] = cfg.system.n();
  doc["d"] = cfg.system.d();
  doc["system"] = {
      {"A", MatrixToJson(cfg.system.A)},
      {"B", MatrixToJson(cfg.system.B)},
      {"Q", MatrixToJson(cfg.system.Q)},
      {"R", MatrixToJson(cfg.system.R)},
      {"sigma_eps", cfg.system.sigma_eps},
      {"x0", MatrixToJson(cfg.system.x0)},
  };
  doc["algo"] = {
      {"K0", MatrixToJson(cfg.algo.K0)},
      {"C_x", cfg.algo.C_x},
      {"C_K", cfg.algo.C_K},
      {"sigma_eta", cfg.algo.sigma_eta},
      {"rank_tol", cfg.algo.rank_tol},
      {"dare_tol", cfg.algo.dare_tol},
      {"dare_max_iters", cfg.algo.dare_max_iters},
      {"estimate_margin", cfg.algo.estimate_margin},
  };
  doc["sweep"] = {
      {"T_grid", cfg.sweep.T_grid},
      {"seeds", cfg.sweep.replicate_ids},
      {"seed", cfg.sweep.seed},
      {"coupled", cfg.sweep.coupled},
  };
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

std::string Sha256Hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kNumeric, "SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  return Sha256Hex(ToJson(cfg).dump());
}

}  // namespace adaptive_lqr
