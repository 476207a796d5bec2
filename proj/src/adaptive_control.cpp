#include "adaptive_lqr/adaptive_control.hpp"

#include <cmath>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

const char* ToString(ResetReason reason) {
  switch (reason) {
    case ResetReason::kNone:
      return "none";
    case ResetReason::kNotIdentifiable:
      return "not_identifiable";
    case ResetReason::kDareFailed:
      return "dare_failed";
    case ResetReason::kStateNorm:
      return "state_norm";
    case ResetReason::kGainNorm:
      return "gain_norm";
  }
  return "unknown";
}

void AlgoConfig::Validate(int n, int d) const {
  if (K0.rows() != d || K0.cols() != n) ThrowInvalid("K0 must be d x n");
  if (!K0.allFinite()) ThrowInvalid("K0 has non-finite entries");
  if (!(C_x > 0.0) || !std::isfinite(C_x)) ThrowInvalid("C_x must be positive");
  if (!(C_K > 0.0) || !std::isfinite(C_K)) ThrowInvalid("C_K must be positive");
  if (!(sigma_eta > 0.0) || !std::isfinite(sigma_eta)) {
    ThrowInvalid("sigma_eta must be positive");
  }
  if (!(rank_tol >= 0.0)) ThrowInvalid("rank_tol must be non-negative");
  if (!(dare_tol > 0.0)) ThrowInvalid("dare_tol must be positive");
  if (dare_max_iters < 1) ThrowInvalid("dare_max_iters must be positive");
  if (!(estimate_margin >= 0.0 && estimate_margin < 1.0)) {
    ThrowInvalid("estimate_margin must lie in [0, 1)");
  }
}

ControllerState ControllerInit(const AlgoConfig& cfg, const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(Q.rows());
  const int d = static_cast<int>(R.rows());
  if (Q.cols() != n || R.cols() != d) ThrowInvalid("Q and R must be square");
  cfg.Validate(n, d);
  ControllerState state{
      .t = 0,
      .regression = RegressionState(n, d),
      .K_hat = cfg.K0,
      .last_reset_reason = ResetReason::kNone,
      .reset_count = 0,
      .Q = Q,
      .R = R,
  };
  return state;
}

double ExplorationStd(std::int64_t t, double sigma_eta) {
  if (t < 0) ThrowInvalid("time index must be non-negative");
  if (t <= 1) return sigma_eta;
  return sigma_eta * std::pow(static_cast<double>(t), -0.25);
}

StepOutput ControllerStep(ControllerState& state, const AlgoConfig& cfg,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& eta) {
  const int n = state.regression.n();
  const int d = state.regression.d();
  if (x.size() != n || eta.size() != d) {
    ThrowInvalid("controller step: x must have length n and eta length d");
  }
  if (!x.allFinite() || !eta.allFinite()) {
    ThrowInvalid("controller step: non-finite input");
  }

  StepOutput out;
  out.diag.t = state.t;
  ResetReason reason = ResetReason::kNone;

  if (state.t < 2) {
    state.K_hat = cfg.K0;
  } else {
    if (state.regression.count() == 0) {
      reason = ResetReason::kNotIdentifiable;
    } else {
      ThetaEstimate est = SolveTheta(state.regression, cfg.rank_tol);
      if (!est.identifiable) {
        reason = ResetReason::kNotIdentifiable;
      } else {
        const auto sol = TrySolveDare(
            est.A_hat, est.B_hat, state.Q, state.R,
            DareOptions{.tol = cfg.dare_tol,
                        .max_iters = cfg.dare_max_iters,
                        .polish = false});
        if (!sol || !(sol->closed_loop_radius < 1.0 - cfg.estimate_margin)) {
          reason = ResetReason::kDareFailed;
        } else {
          out.diag.candidate_gain = sol->K;
        }
      }
      out.diag.theta = std::move(est);
    }

    if (reason == ResetReason::kNone) {
      const double state_bound =
          cfg.C_x * (1.0 + std::log(static_cast<double>(state.t)));
      if (x.norm() > state_bound) {
        reason = ResetReason::kStateNorm;
      } else if (SpectralNorm(*out.diag.candidate_gain) > cfg.C_K) {
        reason = ResetReason::kGainNorm;
      }
    }

    if (reason == ResetReason::kNone) {
      state.K_hat = *out.diag.candidate_gain;
    } else {
      state.K_hat = cfg.K0;
      ++state.reset_count;
    }
  }

  state.last_reset_reason = reason;
  out.diag.reason = reason;
  out.u = state.K_hat * x + eta;
  ++state.t;
  return out;
}

}  // namespace adaptive_lqr
