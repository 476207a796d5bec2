#include "adaptive_lqr/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

#include "adaptive_lqr/config.hpp"
#include "adaptive_lqr/control_core.hpp"
#include "adaptive_lqr/errors.hpp"
#include "adaptive_lqr/sweep.hpp"
#include "oracles/planted_records.hpp"

namespace adaptive_lqr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json ScalarConfigJson() {
  return json::parse(R"({
    "schema": "adaptive-lqr-config/1",
    "n": 1, "d": 1,
    "system": {"A": [0.5], "B": [1.0], "Q": [1.0], "R": [1.0], "sigma_eps": 1.0},
    "algo": {"K0": [0.0], "C_x": 20.0, "C_K": 5.0, "sigma_eta": 1.0},
    "sweep": {"T_grid": [16, 32, 64, 128], "seeds": 3, "seed": 0, "coupled": true}
  })");
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("adaptive_lqr_cli_" + std::string(::testing::UnitTest::GetInstance()
                                                  ->current_test_info()
                                                  ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv(kSeedEnvVar);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv(kSeedEnvVar);
  }

  std::string WriteConfig(const json& j, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  int Run(std::vector<std::string> args, std::string* out_text = nullptr,
          std::string* err_text = nullptr) {
    args.insert(args.begin(), "adaptive-lqr");
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
  }

  fs::path dir_;
};

TEST(ConfigTest, RoundTripAndHash) {
  const auto cfg = ParseConfig(ScalarConfigJson());
  EXPECT_EQ(cfg.sweep.replicate_ids, (std::vector<std::uint64_t>{0, 1, 2}));
  const auto again = ParseConfig(ToJson(cfg));
  EXPECT_EQ(ToJson(again), ToJson(cfg));
  EXPECT_EQ(ConfigHash(again), ConfigHash(cfg));
  EXPECT_EQ(ConfigHash(cfg).size(), 64u);
  auto changed = cfg;
  changed.algo.C_x = 21.0;
  EXPECT_NE(ConfigHash(changed), ConfigHash(cfg));
}

TEST(ConfigTest, Sha256KnownAnswer) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ConfigTest, ValidationErrors) {
  auto expect_invalid = [](const json& j) {
    try {
      ParseConfig(j);
      ADD_FAILURE() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
    }
  };
  json j = ScalarConfigJson();
  j["system"]["A"] = json::array({0.5, 0.1});
  expect_invalid(j);
  j = ScalarConfigJson();
  j["sweep"]["T_grid"] = {32, 16};
  expect_invalid(j);
  j = ScalarConfigJson();
  j["sweep"]["T_grid"] = {1, 16};
  expect_invalid(j);
  j = ScalarConfigJson();
  j["system"]["R"] = json::array({-1.0});
  expect_invalid(j);
  j = ScalarConfigJson();
  j["schema"] = "other/1";
  expect_invalid(j);
  j = ScalarConfigJson();
  j["sweep"]["seeds"] = {1, 1};
  expect_invalid(j);
  j = ScalarConfigJson();
  j["algo"].erase("K0");
  expect_invalid(j);
}

TEST(ConfigTest, StabilizingK0RequiredForSimulation) {
  json j = ScalarConfigJson();
  j["system"]["A"] = json::array({1.5});
  const auto cfg = ParseConfig(j);
  EXPECT_THROW(RequireStabilizingK0(cfg), Error);
}

TEST(ConfigTest, SeedOverride) {
  auto cfg = ParseConfig(ScalarConfigJson());
  setenv(kSeedEnvVar, "42", 1);
  ApplySeedOverride(cfg);
  EXPECT_EQ(cfg.sweep.seed, 42u);
  setenv(kSeedEnvVar, "not-a-number", 1);
  EXPECT_THROW(ApplySeedOverride(cfg), Error);
  unsetenv(kSeedEnvVar);
}

TEST_F(CliTest, DareScalarBenchmark) {
  std::string out;
  ASSERT_EQ(Run({"dare", "--config", WriteConfig(ScalarConfigJson()), "--json"}, &out), 0);
  const json j = json::parse(out);
  EXPECT_NEAR(j["P"][0].get<double>(), 1.1327822185373186, 1e-9);
  EXPECT_NEAR(j["K"][0].get<double>(), -0.2655644370746374, 1e-9);
  EXPECT_LE(j["residual"].get<double>(), 1e-12);
}

TEST_F(CliTest, DareZeroDynamicsReturnsQ) {
  json cfg = ScalarConfigJson();
  cfg["system"]["A"] = json::array({0.0});
  cfg["system"]["Q"] = json::array({2.5});
  std::string out;
  ASSERT_EQ(Run({"--json", "dare", "--config", WriteConfig(cfg)}, &out), 0);
  EXPECT_NEAR(json::parse(out)["P"][0].get<double>(), 2.5, 1e-12);
}

TEST_F(CliTest, DareUnstabilizableExitsFour) {
  json cfg = ScalarConfigJson();
  cfg["system"]["A"] = json::array({1.5});
  cfg["system"]["B"] = json::array({0.0});
  std::string err;
  EXPECT_EQ(Run({"dare", "--config", WriteConfig(cfg)}, nullptr, &err), 4);
  EXPECT_NE(err.find("not"), std::string::npos);
}

TEST_F(CliTest, BadConfigExitsTwo) {
  std::ofstream(dir_ / "broken.json") << "{ not json";
  EXPECT_EQ(Run({"dare", "--config", (dir_ / "broken.json").string()}), 2);
  EXPECT_EQ(Run({"dare"}), 2);
  EXPECT_EQ(Run({"simulate", "--config", WriteConfig(ScalarConfigJson())}), 2);  // no horizon
  EXPECT_EQ(Run({"frobnicate"}), 2);
}

TEST_F(CliTest, MissingConfigFileExitsOne) {
  EXPECT_EQ(Run({"dare", "--config", (dir_ / "absent.json").string()}), 1);
}

TEST_F(CliTest, SimulateWritesDeterministicCsv) {
  const std::string config = WriteConfig(ScalarConfigJson());
  std::string a, b;
  ASSERT_EQ(Run({"simulate", "--config", config, "--seed", "1", "--horizon", "2"}, &a), 0);
  ASSERT_EQ(Run({"simulate", "--config", config, "--seed", "1", "--horizon", "2"}, &b), 0);
  EXPECT_EQ(a, b);
  std::istringstream lines(a);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,x0,u0,eta0,cost,reset");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    // 1 + n + 2d + 2 columns.
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5) << row;
  }
  EXPECT_EQ(rows, 3);

  std::string other;
  ASSERT_EQ(Run({"simulate", "--config", config, "--seed", "2", "--horizon", "2"}, &other), 0);
  EXPECT_NE(other, a);
}

TEST_F(CliTest, SimulateColumnCountForVectorSystem) {
  std::string gen;
  ASSERT_EQ(Run({"gen-system", "--n", "3", "--d", "2", "--spectral-radius", "0.7"}, &gen), 0);
  std::string csv;
  ASSERT_EQ(Run({"simulate", "--config", WriteConfig(json::parse(gen)), "--horizon", "10"},
                &csv),
            0);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 1 + 3 + 2 * 2 + 2 - 1);
}

TEST_F(CliTest, SimulateHonorsSeedEnvironment) {
  const std::string config = WriteConfig(ScalarConfigJson());
  std::string explicit_seed, from_env;
  ASSERT_EQ(Run({"simulate", "--config", config, "--seed", "9", "--horizon", "20"},
                &explicit_seed),
            0);
  setenv(kSeedEnvVar, "9", 1);
  ASSERT_EQ(Run({"simulate", "--config", config, "--horizon", "20"}, &from_env), 0);
  EXPECT_EQ(explicit_seed, from_env);
  // An explicit --seed wins over the environment.
  std::string both;
  ASSERT_EQ(Run({"simulate", "--config", config, "--seed", "3", "--horizon", "20"}, &both), 0);
  EXPECT_NE(both, from_env);
}

TEST_F(CliTest, SimulateRejectsNonStabilizingK0) {
  json cfg = ScalarConfigJson();
  cfg["system"]["A"] = json::array({1.5});
  EXPECT_EQ(Run({"simulate", "--config", WriteConfig(cfg), "--horizon", "5"}), 2);
}

TEST_F(CliTest, OutFlagWritesFile) {
  const fs::path target = dir_ / "traj.csv";
  std::string stdout_text;
  ASSERT_EQ(Run({"simulate", "--config", WriteConfig(ScalarConfigJson()), "--horizon", "4",
                 "--out", target.string()},
                &stdout_text),
            0);
  EXPECT_TRUE(stdout_text.empty());
  EXPECT_EQ(ReadFile(target).substr(0, 5), "t,x0,");
}

TEST_F(CliTest, SweepSingleRecord) {
  json cfg = ScalarConfigJson();
  cfg["sweep"]["T_grid"] = {4};
  cfg["sweep"]["seeds"] = 1;
  const fs::path out = dir_ / "results";
  ASSERT_EQ(Run({"sweep", "--config", WriteConfig(cfg), "--out", out.string()}), 0);
  const auto records = LoadRecords(out);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].T, 4);
  EXPECT_TRUE(fs::exists(out / kManifestFile));
  const json manifest = json::parse(ReadFile(out / kManifestFile));
  EXPECT_EQ(manifest["config_hash"], ConfigHash(ParseConfig(cfg)));
}

TEST_F(CliTest, SweepOutputIndependentOfJobs) {
  const std::string config = WriteConfig(ScalarConfigJson());
  const fs::path one = dir_ / "one", eight = dir_ / "eight";
  ASSERT_EQ(Run({"sweep", "--config", config, "--jobs", "1", "--out", one.string()}), 0);
  ASSERT_EQ(Run({"sweep", "--config", config, "--jobs", "8", "--out", eight.string()}), 0);
  for (std::int64_t T : {16, 32, 64, 128}) {
    const std::string a = ReadFile(one / RecordFileName(T));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, ReadFile(eight / RecordFileName(T))) << T;
  }
}

TEST_F(CliTest, RecordJsonRoundTrip) {
  const auto cfg = ParseConfig(ScalarConfigJson());
  const auto result = RunSweep(cfg, 2);
  ASSERT_EQ(result.records.size(), 12u);
  for (const auto& r : result.records) {
    const RunRecord back = RecordFromJson(RecordToJson(r));
    EXPECT_EQ(back.T, r.T);
    EXPECT_EQ(back.replicate_id, r.replicate_id);
    EXPECT_EQ(back.cost_algo, r.cost_algo);
    EXPECT_EQ(back.regret, r.regret);
    EXPECT_EQ(back.est_err_K, r.est_err_K);
    ASSERT_EQ(back.checkpoints.size(), 1u);
    EXPECT_EQ(back.checkpoints[0].lam_delta, r.checkpoints[0].lam_delta);
    EXPECT_EQ(back.checkpoints[0].gram, r.checkpoints[0].gram);
  }
}

class PlantedResults : public CliTest {
 protected:
  void WritePlanted(const std::vector<std::int64_t>& grid) {
    results_ = dir_ / "planted";
    fs::create_directories(results_);
    for (const auto& r : testing::PlantedRecords(grid, 20, {}, 0.05, 3)) {
      std::ofstream(results_ / RecordFileName(r.T), std::ios::app)
          << RecordToJson(r).dump() << '\n';
    }
  }
  fs::path results_;
};

TEST_F(PlantedResults, RatesRecoverPlantedSlopes) {
  WritePlanted({1024, 2048, 4096, 8192, 16384, 32768});
  std::string out;
  ASSERT_EQ(Run({"rates", results_.string(), "--json"}, &out), 0);
  const json j = json::parse(out);
  EXPECT_TRUE(j["all_pass"].get<bool>());
  bool found = false;
  for (const auto& e : j["entries"]) {
    if (e["name"] == "regret") {
      EXPECT_NEAR(e["slope"].get<double>(), 0.5, 0.05);
      found = true;
    }
  }
  EXPECT_TRUE(found);

  std::string table;
  ASSERT_EQ(Run({"rates", results_.string()}, &table), 0);
  EXPECT_NE(table.find("overall: PASS"), std::string::npos);
}

TEST_F(PlantedResults, RatesNeedFourHorizons) {
  WritePlanted({1024, 2048, 4096});
  EXPECT_EQ(Run({"rates", results_.string()}), 3);
  EXPECT_EQ(Run({"rates", (dir_ / "empty").string()}), 3);
}

TEST_F(PlantedResults, PlotIsWellFormedAndDeterministic) {
  WritePlanted({1024, 2048, 4096, 8192});
  std::string a, b;
  ASSERT_EQ(Run({"plot", results_.string()}, &a), 0);
  ASSERT_EQ(Run({"plot", results_.string()}, &b), 0);
  EXPECT_EQ(a, b);
  std::istringstream in(a);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  EXPECT_EQ(tree.count("svg"), 1u);
}

TEST_F(CliTest, PlotEmptyDirectoryExitsThree) {
  fs::create_directories(dir_ / "nothing");
  EXPECT_EQ(Run({"plot", (dir_ / "nothing").string()}), 3);
}

TEST_F(CliTest, GenSystemScalar) {
  std::string a, b;
  ASSERT_EQ(Run({"gen-system", "--n", "1", "--d", "1", "--spectral-radius", "0.5", "--seed",
                 "4"},
                &a),
            0);
  ASSERT_EQ(Run({"gen-system", "--n", "1", "--d", "1", "--spectral-radius", "0.5", "--seed",
                 "4"},
                &b),
            0);
  EXPECT_EQ(a, b);
  const auto cfg = ParseConfig(json::parse(a));
  EXPECT_NEAR(std::abs(cfg.system.A(0, 0)), 0.5, 1e-12);
  EXPECT_TRUE(CheckStabilizing(cfg.system.A, cfg.system.B, cfg.algo.K0));
}

TEST_F(CliTest, GenSystemVectorIsStabilizableWithinCap) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cfg = ParseConfig(GenerateSystemConfig({4, 2, 0.9, seed}));
    EXPECT_NEAR(SpectralRadius(cfg.system.A), 0.9, 1e-10);
    const auto sol = SolveDare(cfg.system.A, cfg.system.B, cfg.system.Q, cfg.system.R);
    EXPECT_GT(cfg.algo.C_K, SpectralNorm(sol.K));
  }
}

TEST_F(CliTest, HelpExitsZero) {
  std::string out;
  EXPECT_EQ(Run({"--help"}, &out), 0);
  EXPECT_NE(out.find("simulate"), std::string::npos);
}

}  // namespace
}  // namespace adaptive_lqr
