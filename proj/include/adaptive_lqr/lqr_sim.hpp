#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adaptive_lqr/adaptive_control.hpp"
#include "adaptive_lqr/control_core.hpp"
#include "adaptive_lqr/diagnostics.hpp"
#include "adaptive_lqr/noise.hpp"

namespace adaptive_lqr {

inline constexpr double kDivergenceThreshold = 1e12;

// x_{t+1} = A x_t + B u_t + eps_t.
Eigen::VectorXd StepDynamics(const SystemSpec& spec, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u,
                             const Eigen::VectorXd& eps);

// x'Qx + u'Ru.
double CostIncrement(const SystemSpec& spec, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u);

// Hash of every field of the system; used to check that two records describe the
// same system.
std::uint64_t SystemFingerprint(const SystemSpec& spec);

enum class RunSide { kAlgorithm, kOracle, kPaired };

struct RunRecord {
  RunSide side = RunSide::kPaired;
  std::uint64_t seed = 0;
  std::uint64_t replicate_id = 0;
  std::uint64_t system_tag = 0;
  bool coupled = true;
  std::int64_t T = 0;
  double cost_algo = 0.0;    // J(U, T)
  double cost_oracle = 0.0;  // J(U*, T)
  double regret = 0.0;
  double est_err_theta = 0.0;  // ||Theta_hat_T - Theta||_2
  double est_err_K = 0.0;      // ||K_hat_T - K||_2
  int reset_count = 0;
  bool failed = false;
  std::optional<std::int64_t> failure_time;
  std::vector<CheckpointDiag> checkpoints;
};

// One row per simulated step, handed to SimOptions::observer.
struct StepTrace {
  std::int64_t t = 0;
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& u;
  const Eigen::VectorXd& eta;
  double cost_increment = 0.0;
  ResetReason reason = ResetReason::kNone;
};

struct SimOptions {
  // Oracle draws eps from the algorithm's stream when true; from an
  // independent stream otherwise.
  bool coupled = true;
  // Bypasses the adaptive controller: u_t = pinned_gain x_t + eta_t.
  std::optional<Eigen::MatrixXd> pinned_gain;
  bool zero_exploration = false;
  double divergence_threshold = kDivergenceThreshold;
  std::function<void(const StepTrace&)> observer;
};

/// Simulates x_0 .. x_T in closed loop with the adaptive controller and
/// accumulates J(U, T) = sum_{t=1}^{T} x_t'Qx_t + u_t'Ru_t.
///
/// At step t the controller's regression holds transitions k = 0..t-2. Each
/// entry of `checkpoint_grid` (values in [1, T]) produces a CheckpointDiag
/// taken after u_T is applied, with G_T and Theta_hat_T built from
/// transitions k = 0..T-1. Horizon T itself always produces the top-level
/// fields of the record.
///
/// Throws kInvalidInput unless T >= 2 and K0 stabilizes the true system,
/// DivergedError if ||x_t|| crosses the divergence threshold.
RunRecord RunAlgorithm(const SystemSpec& spec, const AlgoConfig& cfg,
                       const NoiseStreams& streams, std::int64_t T,
                       std::span<const std::int64_t> checkpoint_grid = {},
                       const SimOptions& opts = {});

// Runs u_t = K x_t with K from the true DARE, consuming the same eps indices
// as RunAlgorithm when opts.coupled. Checkpoints carry the running cost only.
RunRecord RunOracle(const SystemSpec& spec, const NoiseStreams& streams,
                    std::int64_t T,
                    std::span<const std::int64_t> checkpoint_grid = {},
                    const SimOptions& opts = {});

// cost_algo - cost_oracle. Throws kInvalidInput if the records do not share
// seed, replicate, horizon and system.
double Regret(const RunRecord& algo, const RunRecord& oracle);

// Joins an algorithm run and its oracle run into one paired record per
// checkpoint. Both runs must have been given the same checkpoint grid.
std::vector<RunRecord> PairAtCheckpoints(const RunRecord& algo,
                                         const RunRecord& oracle);

/// Runs one replicate to max(horizons) for both sides and returns one paired
/// record per horizon, sorted by T. A divergence marks every record of the
/// replicate as failed instead of throwing.
std::vector<RunRecord> RunPairedReplicate(const SystemSpec& spec,
                                          const AlgoConfig& cfg,
                                          std::uint64_t seed,
                                          std::uint64_t replicate_id,
                                          std::span<const std::int64_t> horizons,
                                          bool coupled = true);

}  // namespace adaptive_lqr
