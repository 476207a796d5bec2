#include "adaptive_lqr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "adaptive_lqr/config.hpp"
#include "adaptive_lqr/control_core.hpp"
#include "adaptive_lqr/lqr_sim.hpp"
#include "adaptive_lqr/noise.hpp"
#include "adaptive_lqr/plot.hpp"
#include "adaptive_lqr/rates.hpp"
#include "adaptive_lqr/sweep.hpp"

namespace adaptive_lqr {

using nlohmann::json;

namespace {

// Shortest text that round-trips the double.
std::string Exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void PrintMatrix(std::ostream& os, const char* name, const Eigen::MatrixXd& M) {
  os << name << " =\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    os << " ";
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << ' ' << std::setw(14) << Fixed(M(i, j), 9);
    os << '\n';
  }
}

json OptionalNumber(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json FiniteOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ReportToJson(const RateReport& report) {
  json j;
  j["horizons"] = report.horizons;
  j["records_used"] = report.records_used;
  j["records_failed"] = report.records_failed;
  json entries = json::array();
  for (const RateEntry& e : report.entries) {
    json je;
    je["name"] = e.name;
    je["band"] = {OptionalNumber(e.band.lo), OptionalNumber(e.band.hi)};
    json medians = json::array();
    for (const RatePoint& p : e.medians) medians.push_back({p.T, p.statistic});
    je["medians"] = medians;
    if (e.fit) {
      je["slope"] = e.fit->slope;
      je["intercept"] = e.fit->intercept;
      je["stderr"] = FiniteOrNull(e.fit->stderr_slope);
      je["ci95"] = {FiniteOrNull(e.fit->ci_low), FiniteOrNull(e.fit->ci_high)};
      je["r_squared"] = e.fit->r_squared;
    } else {
      je["slope"] = nullptr;
    }
    je["pass"] = e.pass;
    if (!e.note.empty()) je["note"] = e.note;
    entries.push_back(je);
  }
  j["entries"] = entries;
  j["regret_positive"] = report.regret_positive;
  j["all_pass"] = report.all_pass;
  return j;
}

std::string BandText(const SlopeBand& b) {
  return "[" + (b.lo ? Fixed(*b.lo, 2) : std::string("-inf")) + ", " +
         (b.hi ? Fixed(*b.hi, 2) : std::string("+inf")) + "]";
}

ExperimentConfig LoadForSimulation(const std::string& path) {
  ExperimentConfig cfg = LoadConfig(path);
  ApplySeedOverride(cfg);
  RequireStabilizingK0(cfg);
  return cfg;
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return kExitInvalidConfig;
    case ErrorKind::kNoData:
    case ErrorKind::kInsufficientData:
      return kExitInsufficientData;
    case ErrorKind::kNotStabilizable:
    case ErrorKind::kNumeric:
    case ErrorKind::kDiverged:
      return kExitNumericFailure;
    case ErrorKind::kIo:
      return kExitIo;
  }
  return kExitIo;
}

json GenerateSystemConfig(const GenSystemOptions& opts) {
  if (opts.n < 1 || opts.d < 1) ThrowInvalid("--n and --d must be positive");
  if (!(opts.spectral_radius > 0.0 && opts.spectral_radius < 1.0)) {
    ThrowInvalid("--spectral-radius must lie in (0, 1) for K0 = 0");
  }
  const NoiseStreams rng(opts.seed, 0);
  const int n = opts.n;
  const int d = opts.d;
  const Eigen::VectorXd a = rng.StandardNormal(StreamTag::kSystem, 0, n * n);
  const Eigen::VectorXd b = rng.StandardNormal(StreamTag::kSystem, 1, n * d);

  ExperimentConfig cfg;
  Eigen::MatrixXd A = Eigen::Map<const Eigen::MatrixXd>(a.data(), n, n);
  const double rho = SpectralRadius(A);
  if (!(rho > 0.0)) throw Error(ErrorKind::kNumeric, "sampled A is nilpotent; try another seed");
  A *= opts.spectral_radius / rho;
  cfg.system.A = A;
  cfg.system.B = Eigen::Map<const Eigen::MatrixXd>(b.data(), n, d);
  cfg.system.Q = Eigen::MatrixXd::Identity(n, n);
  cfg.system.R = Eigen::MatrixXd::Identity(d, d);
  cfg.system.sigma_eps = 1.0;
  cfg.system.x0 = Eigen::VectorXd::Zero(n);
  cfg.system.Validate();

  cfg.algo.K0 = Eigen::MatrixXd::Zero(d, n);
  if (!CheckStabilizing(cfg.system.A, cfg.system.B, cfg.algo.K0, 0.0)) {
    throw Error(ErrorKind::kNumeric, "generated system is not stabilized by K0 = 0");
  }
  const RiccatiSolution sol = SolveDare(cfg.system.A, cfg.system.B, cfg.system.Q, cfg.system.R);
  cfg.algo.C_x = 20.0;
  cfg.algo.C_K = std::max(5.0, 2.0 * SpectralNorm(sol.K));
  cfg.algo.sigma_eta = 1.0;
  for (int k = 10; k <= 17; ++k) cfg.sweep.T_grid.push_back(std::int64_t{1} << k);
  for (std::uint64_t i = 0; i < 50; ++i) cfg.sweep.replicate_ids.push_back(i);
  cfg.sweep.seed = opts.seed;
  cfg.sweep.coupled = true;
  cfg.output_dir = "results";
  return ToJson(cfg);
}

int CmdDare(const std::string& config_path, bool as_json, std::ostream& out) {
  const ExperimentConfig cfg = LoadConfig(config_path);
  const SystemSpec& s = cfg.system;
  const RiccatiSolution sol =
      SolveDare(s.A, s.B, s.Q, s.R,
                DareOptions{.tol = cfg.algo.dare_tol, .max_iters = cfg.algo.dare_max_iters});
  if (as_json) {
    json j = {
        {"n", s.n()},
        {"d", s.d()},
        {"P", MatrixToJson(sol.P)},
        {"K", MatrixToJson(sol.K)},
        {"residual", sol.residual},
        {"iterations", sol.iterations},
        {"closed_loop_radius", sol.closed_loop_radius},
    };
    out << j.dump(2) << '\n';
  } else {
    PrintMatrix(out, "P", sol.P);
    PrintMatrix(out, "K", sol.K);
    out << "residual = " << Exact(sol.residual) << '\n';
    out << "iterations = " << sol.iterations << '\n';
    out << "rho(A+BK) = " << Fixed(sol.closed_loop_radius, 9) << '\n';
  }
  return kExitOk;
}

int CmdSimulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                std::int64_t horizon, std::uint64_t replicate_id, std::ostream& out) {
  ExperimentConfig cfg = LoadForSimulation(config_path);
  if (seed) cfg.sweep.seed = *seed;
  const int n = cfg.system.n();
  const int d = cfg.system.d();

  std::ostringstream csv;
  csv << 't';
  for (int i = 0; i < n; ++i) csv << ",x" << i;
  for (int i = 0; i < d; ++i) csv << ",u" << i;
  for (int i = 0; i < d; ++i) csv << ",eta" << i;
  csv << ",cost,reset\n";

  SimOptions opts;
  opts.coupled = cfg.sweep.coupled;
  opts.observer = [&](const StepTrace& row) {
    csv << row.t;
    for (Eigen::Index i = 0; i < row.x.size(); ++i) csv << ',' << Exact(row.x(i));
    for (Eigen::Index i = 0; i < row.u.size(); ++i) csv << ',' << Exact(row.u(i));
    for (Eigen::Index i = 0; i < row.eta.size(); ++i) csv << ',' << Exact(row.eta(i));
    csv << ',' << Exact(row.cost_increment) << ',' << ToString(row.reason) << '\n';
  };
  RunAlgorithm(cfg.system, cfg.algo, NoiseStreams(cfg.sweep.seed, replicate_id), horizon, {},
               opts);
  out << csv.str();
  if (!out) throw Error(ErrorKind::kIo, "failed to write trajectory");
  return kExitOk;
}

int CmdSweep(const std::string& config_path, int jobs,
             const std::optional<std::string>& out_dir, std::ostream& out) {
  const ExperimentConfig cfg = LoadForSimulation(config_path);
  const std::filesystem::path dir = out_dir ? *out_dir : cfg.output_dir;
  const SweepResult result = RunSweep(cfg, jobs);
  WriteSweep(cfg, result, dir);
  out << "wrote " << result.records.size() << " records for " << result.replicates
      << " replicates x " << cfg.sweep.T_grid.size() << " horizons to " << dir.string()
      << '\n';
  if (result.failed_replicates > 0) {
    out << result.failed_replicates << " replicate(s) diverged\n";
  }
  if (10 * result.failed_replicates > result.replicates) return kExitNumericFailure;
  return kExitOk;
}

int CmdRates(const std::string& results_dir, bool as_json, std::ostream& out) {
  const RateReport report = BuildRateReport(LoadRecords(results_dir));
  if (as_json) {
    out << ReportToJson(report).dump(2) << '\n';
    return kExitOk;
  }
  out << "records used " << report.records_used << ", failed " << report.records_failed
      << ", horizons " << report.horizons.size() << " (T = " << report.horizons.front()
      << " .. " << report.horizons.back() << ")\n";
  out << std::left << std::setw(18) << "metric" << std::setw(10) << "slope" << std::setw(10)
      << "stderr" << std::setw(22) << "95% CI" << std::setw(16) << "band"
      << "result\n";
  for (const RateEntry& e : report.entries) {
    out << std::left << std::setw(18) << e.name;
    if (e.fit) {
      out << std::setw(10) << Fixed(e.fit->slope, 4) << std::setw(10)
          << Fixed(e.fit->stderr_slope, 4) << std::setw(22)
          << ("[" + Fixed(e.fit->ci_low, 3) + ", " + Fixed(e.fit->ci_high, 3) + "]");
    } else {
      out << std::setw(10) << "n/a" << std::setw(10) << "n/a" << std::setw(22) << "n/a";
    }
    out << std::setw(16) << BandText(e.band) << (e.pass ? "PASS" : "FAIL");
    if (!e.note.empty()) out << "  (" << e.note << ")";
    out << '\n';
  }
  out << "median regret > 0 for T >= " << kRegretSignHorizon << ": "
      << (report.regret_positive ? "PASS" : "FAIL") << '\n';
  out << "overall: " << (report.all_pass ? "PASS" : "FAIL") << '\n';
  return kExitOk;
}

int CmdPlot(const std::string& results_dir, std::ostream& out) {
  const RateReport report = BuildRateReport(LoadRecords(results_dir));
  out << RenderRatePlot(report);
  if (!out) throw Error(ErrorKind::kIo, "failed to write SVG");
  return kExitOk;
}

int CmdGenSystem(const GenSystemOptions& opts, std::ostream& out) {
  out << GenerateSystemConfig(opts).dump(2) << '\n';
  return kExitOk;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive LQR: stepwise noisy certainty-equivalent control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  bool as_json = false;
  int jobs = 1;
  std::string out_path;
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_flag("--json", as_json, "Machine-readable output");
  app.add_option("--jobs", jobs, "Worker threads for sweep")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Output file (output directory for sweep)");

  auto* dare = app.add_subcommand("dare", "Solve the DARE of the configured system");
  dare->fallthrough();

  auto* simulate = app.add_subcommand("simulate", "Write one closed-loop trajectory as CSV");
  std::optional<std::uint64_t> sim_seed;
  std::int64_t horizon = 0;
  std::uint64_t replicate = 0;
  simulate->add_option("--seed", sim_seed, "Base seed (overrides config and environment)");
  simulate->add_option("--horizon", horizon, "Horizon T (>= 2)")->required();
  simulate->add_option("--replicate", replicate, "Replicate id");
  simulate->fallthrough();

  auto* sweep = app.add_subcommand("sweep", "Run the configured Monte Carlo sweep");
  sweep->fallthrough();

  std::string results_dir;
  auto* rates = app.add_subcommand("rates", "Fit growth exponents from sweep records");
  rates->add_option("dir", results_dir, "Results directory")->required();
  rates->fallthrough();
  auto* plot = app.add_subcommand("plot", "Emit log-log SVG charts from sweep records");
  plot->add_option("dir", results_dir, "Results directory")->required();
  plot->fallthrough();

  auto* gen = app.add_subcommand("gen-system", "Generate a random stabilizable config");
  GenSystemOptions gen_opts;
  gen->add_option("--n", gen_opts.n, "State dimension")->required();
  gen->add_option("--d", gen_opts.d, "Control dimension")->required();
  gen->add_option("--spectral-radius", gen_opts.spectral_radius, "rho(A) in (0, 1)")->required();
  gen->add_option("--seed", gen_opts.seed, "Seed");
  gen->fallthrough();

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  auto need_config = [&] {
    if (config_path.empty()) ThrowInvalid("--config is required");
  };

  try {
    std::ofstream file;
    std::ostream* sink = &out;
    const bool redirect = !out_path.empty() && !sweep->parsed();
    if (redirect) {
      file.open(out_path, std::ios::binary | std::ios::trunc);
      if (!file) throw Error(ErrorKind::kIo, "cannot open " + out_path);
      sink = &file;
    }
    int code = kExitOk;
    if (dare->parsed()) {
      need_config();
      code = CmdDare(config_path, as_json, *sink);
    } else if (simulate->parsed()) {
      need_config();
      code = CmdSimulate(config_path, sim_seed, horizon, replicate, *sink);
    } else if (sweep->parsed()) {
      need_config();
      code = CmdSweep(config_path, jobs,
                      out_path.empty() ? std::nullopt : std::optional<std::string>(out_path),
                      out);
    } else if (rates->parsed()) {
      code = CmdRates(results_dir, as_json, *sink);
    } else if (plot->parsed()) {
      code = CmdPlot(results_dir, *sink);
    } else if (gen->parsed()) {
      code = CmdGenSystem(gen_opts, *sink);
    }
    if (redirect) {
      file.flush();
      if (!file) throw Error(ErrorKind::kIo, "failed writing " + out_path);
    }
    return code;
  } catch (const Error& e) {
    err << "error (" << ToString(e.kind()) << "): " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace adaptive_lqr
