#include "adaptive_lqr/lqr_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "adaptive_lqr/errors.hpp"
#include "adaptive_lqr/sysid.hpp"

namespace adaptive_lqr {

namespace {

class Fnv1a {
 public:
  void Add(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001B3ull;
    }
  }
  void Add(const Eigen::MatrixXd& M) {
    const std::int64_t dims[2] = {M.rows(), M.cols()};
    Add(dims, sizeof(dims));
    Add(M.data(), sizeof(double) * static_cast<std::size_t>(M.size()));
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

std::vector<std::int64_t> NormalizedGrid(std::span<const std::int64_t> grid,
                                         std::int64_t T) {
  std::vector<std::int64_t> out(grid.begin(), grid.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (std::int64_t c : out) {
    if (c < 1 || c > T) ThrowInvalid("checkpoints must lie in [1, T]");
  }
  return out;
}

void CheckHorizon(std::int64_t T) {
  if (T < 2) ThrowInvalid("horizon T must be at least 2");
}

void CheckDiverged(const Eigen::VectorXd& x, std::int64_t t, double threshold) {
  const double norm = x.norm();
  if (!std::isfinite(norm) || norm > threshold) throw DivergedError(t, norm);
}

}  // namespace

Eigen::VectorXd StepDynamics(const SystemSpec& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u,
                             const Eigen::VectorXd& eps) {
  if (x.size() != spec.n() || eps.size() != spec.n() || u.size() != spec.d()) {
    ThrowInvalid("step dynamics: dimension mismatch");
  }
  return spec.A * x + spec.B * u + eps;
}

double CostIncrement(const SystemSpec& spec, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
  if (x.size() != spec.n() || u.size() != spec.d()) {
    ThrowInvalid("cost increment: dimension mismatch");
  }
  return x.dot(spec.Q * x) + u.dot(spec.R * u);
}

std::uint64_t SystemFingerprint(const SystemSpec& spec) {
  Fnv1a h;
  h.Add(spec.A);
  h.Add(spec.B);
  h.Add(spec.Q);
  h.Add(spec.R);
  h.Add(&spec.sigma_eps, sizeof(double));
  h.Add(Eigen::MatrixXd(spec.x0));
  return h.value();
}

RunRecord RunAlgorithm(const SystemSpec& spec, const AlgoConfig& cfg,
                       const NoiseStreams& streams, std::int64_t T,
                       std::span<const std::int64_t> checkpoint_grid,
                       const SimOptions& opts) {
  spec.Validate();
  cfg.Validate(spec.n(), spec.d());
  CheckHorizon(T);
  if (!CheckStabilizing(spec.A, spec.B, cfg.K0, 0.0)) {
    ThrowInvalid("K0 does not stabilize the true system");
  }
  if (opts.pinned_gain &&
      (opts.pinned_gain->rows() != spec.d() || opts.pinned_gain->cols() != spec.n())) {
    ThrowInvalid("pinned gain must be d x n");
  }
  const std::vector<std::int64_t> grid = NormalizedGrid(checkpoint_grid, T);
  const RiccatiSolution truth = SolveDare(spec.A, spec.B, spec.Q, spec.R);
  const int n = spec.n();
  const int d = spec.d();
  Eigen::MatrixXd theta_true(n, n + d);
  theta_true << spec.A, spec.B;

  RunRecord rec;
  rec.side = RunSide::kAlgorithm;
  rec.seed = streams.seed();
  rec.replicate_id = streams.replicate_id();
  rec.system_tag = SystemFingerprint(spec);
  rec.coupled = opts.coupled;
  rec.T = T;

  ControllerState state = ControllerInit(cfg, spec.Q, spec.R);
  Eigen::VectorXd x = spec.x0;
  Eigen::VectorXd x_prev(n), u_prev(d);
  Eigen::VectorXd eta(d), eps(n);
  Eigen::MatrixXd delta_sum = Eigen::MatrixXd::Zero(d, d);
  double cost = 0.0;
  double decomp_sum = 0.0;  // sum eps_tilde'P eps_tilde + eta'R eta
  auto next_checkpoint = grid.begin();

  for (std::int64_t t = 0; t <= T; ++t) {
    const auto ut = static_cast<std::uint64_t>(t);
    if (opts.zero_exploration) {
      eta.setZero();
    } else {
      streams.StandardNormal(StreamTag::kEta, ut, eta);
      eta *= ExplorationStd(t, cfg.sigma_eta);
    }

    Eigen::VectorXd u;
    ResetReason reason = ResetReason::kNone;
    if (opts.pinned_gain) {
      state.K_hat = *opts.pinned_gain;
      ++state.t;
      u = state.K_hat * x + eta;
    } else {
      StepOutput step = ControllerStep(state, cfg, x, eta);
      u = std::move(step.u);
      reason = step.diag.reason;
    }

    const double increment = CostIncrement(spec, x, u);
    streams.StandardNormal(StreamTag::kEps, ut, eps);
    eps *= spec.sigma_eps;
    if (t >= 1) {
      cost += increment;
      const Eigen::VectorXd eps_tilde = spec.B * eta + eps;
      decomp_sum += eps_tilde.dot(truth.P * eps_tilde) + eta.dot(spec.R * eta);
      // Transition k = t-1; step t+1 then sees k = 0..t-1.
      state.regression.Record(x_prev, u_prev, x);
    }
    const Eigen::VectorXd delta = (state.K_hat - truth.K) * x + eta;

    if (opts.observer) {
      opts.observer(StepTrace{t, x, u, eta, increment, reason});
    }

    const bool on_grid = next_checkpoint != grid.end() && *next_checkpoint == t;
    if (on_grid || t == T) {
      const ThetaEstimate est = SolveTheta(state.regression, cfg.rank_tol);
      const EstimationErrors errs{SpectralNorm(est.Theta() - theta_true),
                                  SpectralNorm(state.K_hat - truth.K)};
      CheckpointDiag diag =
          CheckpointDiagnostics(state.regression.gram(), delta_sum, truth.K, errs);
      diag.T = t;
      diag.cost = cost;
      diag.reset_count = state.reset_count;
      diag.decomp_residual = cost - decomp_sum;
      if (t == T) {
        rec.cost_algo = cost;
        rec.est_err_theta = errs.theta;
        rec.est_err_K = errs.gain;
        rec.reset_count = state.reset_count;
      }
      if (on_grid) {
        rec.checkpoints.push_back(std::move(diag));
        ++next_checkpoint;
      }
    }
    delta_sum.noalias() += delta * delta.transpose();

    x_prev = x;
    u_prev = u;
    x = spec.A * x + spec.B * u + eps;
    CheckDiverged(x, t + 1, opts.divergence_threshold);
  }
  return rec;
}

RunRecord RunOracle(const SystemSpec& spec, const NoiseStreams& streams,
                    std::int64_t T,
                    std::span<const std::int64_t> checkpoint_grid,
                    const SimOptions& opts) {
  spec.Validate();
  CheckHorizon(T);
  const std::vector<std::int64_t> grid = NormalizedGrid(checkpoint_grid, T);
  const RiccatiSolution truth = SolveDare(spec.A, spec.B, spec.Q, spec.R);
  const StreamTag eps_tag =
      opts.coupled ? StreamTag::kEps : StreamTag::kEpsIndependent;
  const int n = spec.n();
  const int d = spec.d();

  RunRecord rec;
  rec.side = RunSide::kOracle;
  rec.seed = streams.seed();
  rec.replicate_id = streams.replicate_id();
  rec.system_tag = SystemFingerprint(spec);
  rec.coupled = opts.coupled;
  rec.T = T;

  Eigen::VectorXd x = spec.x0;
  Eigen::VectorXd u(d), eps(n);
  const Eigen::VectorXd no_eta = Eigen::VectorXd::Zero(d);
  double cost = 0.0;
  auto next_checkpoint = grid.begin();
  for (std::int64_t t = 0; t <= T; ++t) {
    u.noalias() = truth.K * x;
    const double increment = CostIncrement(spec, x, u);
    if (t >= 1) cost += increment;
    if (opts.observer) {
      opts.observer(StepTrace{t, x, u, no_eta, increment, ResetReason::kNone});
    }
    if (next_checkpoint != grid.end() && *next_checkpoint == t) {
      CheckpointDiag diag;
      diag.T = t;
      diag.cost = cost;
      rec.checkpoints.push_back(std::move(diag));
      ++next_checkpoint;
    }
    streams.StandardNormal(eps_tag, static_cast<std::uint64_t>(t), eps);
    eps *= spec.sigma_eps;
    x = spec.A * x + spec.B * u + eps;
    CheckDiverged(x, t + 1, opts.divergence_threshold);
  }
  rec.cost_oracle = cost;
  return rec;
}

double Regret(const RunRecord& algo, const RunRecord& oracle) {
  if (algo.side != RunSide::kAlgorithm || oracle.side != RunSide::kOracle) {
    ThrowInvalid("regret needs an algorithm record and an oracle record");
  }
  if (algo.seed != oracle.seed || algo.replicate_id != oracle.replicate_id ||
      algo.T != oracle.T || algo.system_tag != oracle.system_tag ||
      algo.coupled != oracle.coupled) {
    ThrowInvalid("regret: records are not paired");
  }
  return algo.cost_algo - oracle.cost_oracle;
}

std::vector<RunRecord> PairAtCheckpoints(const RunRecord& algo,
                                         const RunRecord& oracle) {
  // Validates the pairing metadata.
  Regret(algo, oracle);
  if (algo.checkpoints.size() != oracle.checkpoints.size()) {
    ThrowInvalid("paired runs have different checkpoint grids");
  }
  std::vector<RunRecord> out;
  out.reserve(algo.checkpoints.size());
  for (std::size_t i = 0; i < algo.checkpoints.size(); ++i) {
    const CheckpointDiag& a = algo.checkpoints[i];
    const CheckpointDiag& o = oracle.checkpoints[i];
    if (a.T != o.T) ThrowInvalid("paired runs have different checkpoint grids");
    RunRecord r;
    r.side = RunSide::kPaired;
    r.seed = algo.seed;
    r.replicate_id = algo.replicate_id;
    r.system_tag = algo.system_tag;
    r.coupled = algo.coupled;
    r.T = a.T;
    r.cost_algo = a.cost;
    r.cost_oracle = o.cost;
    r.regret = a.cost - o.cost;
    r.est_err_theta = a.est_err_theta;
    r.est_err_K = a.est_err_K;
    r.reset_count = a.reset_count;
    r.checkpoints = {a};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> RunPairedReplicate(const SystemSpec& spec,
                                          const AlgoConfig& cfg,
                                          std::uint64_t seed,
                                          std::uint64_t replicate_id,
                                          std::span<const std::int64_t> horizons,
                                          bool coupled) {
  if (horizons.empty()) ThrowInvalid("at least one horizon is required");
  const std::vector<std::int64_t> grid =
      NormalizedGrid(horizons, *std::max_element(horizons.begin(), horizons.end()));
  const std::int64_t t_max = grid.back();
  const NoiseStreams streams(seed, replicate_id);
  SimOptions opts;
  opts.coupled = coupled;
  try {
    const RunRecord algo = RunAlgorithm(spec, cfg, streams, t_max, grid, opts);
    const RunRecord oracle = RunOracle(spec, streams, t_max, grid, opts);
    return PairAtCheckpoints(algo, oracle);
  } catch (const DivergedError& e) {
    std::vector<RunRecord> out;
    for (std::int64_t T : grid) {
      RunRecord r;
      r.seed = seed;
      r.replicate_id = replicate_id;
      r.system_tag = SystemFingerprint(spec);
      r.coupled = coupled;
      r.T = T;
      r.failed = true;
      r.failure_time = e.failure_time();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.cost_algo = r.cost_oracle = r.regret = nan;
      r.est_err_theta = r.est_err_K = nan;
      out.push_back(std::move(r));
    }
    return out;
  }
}

}  // namespace adaptive_lqr
