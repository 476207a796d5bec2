#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "adaptive_lqr/control_core.hpp"
#include "adaptive_lqr/sysid.hpp"

namespace adaptive_lqr {

// Inputs of the stepwise noisy certainty-equivalent controller.
struct AlgoConfig {
  Eigen::MatrixXd K0;        // d x n, stabilizing for the true system
  double C_x = 20.0;         // state-norm reset scale
  double C_K = 5.0;          // gain-norm cap, must exceed ||K||
  double sigma_eta = 1.0;    // exploration noise base scale
  double rank_tol = kDefaultRankTol;
  double dare_tol = 1e-12;
  int dare_max_iters = 100000;
  // rho(A_hat + B_hat K_hat) must stay below 1 - estimate_margin.
  double estimate_margin = 1e-6;

  void Validate(int n, int d) const;
};

enum class ResetReason {
  kNone,
  kNotIdentifiable,
  kDareFailed,
  kStateNorm,
  kGainNorm,
};

const char* ToString(ResetReason reason);

struct ControllerState {
  std::int64_t t = 0;
  // Transitions k = 0..t-2 at the start of step t; the caller feeds it.
  RegressionState regression;
  Eigen::MatrixXd K_hat;
  ResetReason last_reset_reason = ResetReason::kNone;
  int reset_count = 0;
  // Cost weights are known to the controller (only A, B are unknown).
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

struct StepDiagnostics {
  std::int64_t t = 0;
  ResetReason reason = ResetReason::kNone;
  // Estimate used to synthesize K_hat at this step (t >= 2 only).
  std::optional<ThetaEstimate> theta;
  // Gain synthesized from the estimate before the reset checks, if any.
  std::optional<Eigen::MatrixXd> candidate_gain;
  // Delta_t = (K_hat_t - K) x_t + eta_t; the controller leaves it empty and
  // the harness, which knows K, fills it in.
  Eigen::VectorXd delta;
};

struct StepOutput {
  Eigen::VectorXd u;
  StepDiagnostics diag;
};

// t = 0, K_hat = K0, empty regression. Throws kInvalidInput on a bad config.
ControllerState ControllerInit(const AlgoConfig& cfg, const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& R);

// Standard deviation of eta_t: sigma_eta for t in {0, 1}, sigma_eta * t^{-1/4}
// afterwards (variance sigma_eta^2 / sqrt(t)).
double ExplorationStd(std::int64_t t, double sigma_eta);

/// Advances the controller by one step and returns u_t = K_hat_t x_t + eta_t.
///
/// For t < 2 the gain is K0. From t = 2 on, [A_hat, B_hat] is re-estimated from
/// the regression, K_hat_t comes from the DARE on the estimate, and K_hat_t is
/// reset to K0 when the estimate is rank deficient, the DARE fails, ||x_t|| >
/// C_x (1 + ln t) or ||K_hat_t|| > C_K. None of these pathologies throw.
///
/// `eta` is drawn by the caller with std ExplorationStd(t, sigma_eta). Throws
/// kInvalidInput on dimension mismatch or non-finite inputs.
StepOutput ControllerStep(ControllerState& state, const AlgoConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& eta);

}  // namespace adaptive_lqr
