#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "adaptive_lqr/control_core.hpp"

namespace adaptive_lqr {

// Per-horizon measurements taken while a run passes checkpoint T.
struct CheckpointDiag {
  std::int64_t T = 0;
  double cost = 0.0;  // running J(., T)
  int reset_count = 0;
  Eigen::MatrixXd gram;  // G_T = sum_{t<T} z_t z_t'
  double lam_parallel = 0.0;  // lambda_min of G_T on span [I; K]
  double lam_perp = 0.0;      // lambda_max of G_T on span [-K'; I]
  double lam_delta = 0.0;     // lambda_max of sum_{t<T} Delta_t Delta_t'
  double est_err_theta = 0.0;
  double est_err_K = 0.0;
  double decomp_residual = 0.0;  // D_T
};

struct SubspaceProjectors {
  Eigen::MatrixXd parallel;       // (n+d) x n, orthonormal basis of col([I; K])
  Eigen::MatrixXd perpendicular;  // (n+d) x d, orthonormal basis of col([-K'; I])
};

SubspaceProjectors MakeSubspaceProjectors(const Eigen::MatrixXd& K_true);

struct EstimationErrors {
  double theta = 0.0;
  double gain = 0.0;
};

/// Restricts the Gram matrix to the two subspaces split by the true gain:
///   lam_parallel = lambda_min(P_par' G P_par)
///   lam_perp     = lambda_max(P_perp' G P_perp)
///   lam_delta    = lambda_max(delta_sum)
/// Throws kInvalidInput if gram or delta_sum is not symmetric PSD (an
/// eigenvalue below -1e-8 * trace).
CheckpointDiag CheckpointDiagnostics(const Eigen::MatrixXd& gram,
                                     const Eigen::MatrixXd& delta_sum,
                                     const Eigen::MatrixXd& K_true,
                                     const EstimationErrors& errs);

// Both sides of
//   x'(Q + Kh'R Kh)x + x'(A+B Kh)'P(A+B Kh)x - x'Px = x'(Kh-K)'(R+B'PB)(Kh-K)x
struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;  // sum of magnitudes of the terms on the left
};

IdentitySides RiccatiIdentitySides(const SystemSpec& spec,
                                   const Eigen::MatrixXd& P,
                                   const Eigen::MatrixXd& K_true,
                                   const Eigen::MatrixXd& K_hat,
                                   const Eigen::VectorXd& x);

// Relative discrepancy |lhs - rhs| / max(|lhs|, |rhs|). When both sides
// vanish (below 1e-10 of the term scale) the discrepancy is measured against
// the term scale instead.
double IdentityDiscrepancy(const IdentitySides& sides);

struct IdentityCheckResult {
  double max_error = 0.0;
  bool passed = false;  // max_error <= rel_tol
};

/// Max discrepancy of the identity above over `trials` random draws of
/// x ~ N(0, I_n) and K_hat = K_true + N(0, 1) entries, seeded by `seed`.
IdentityCheckResult RiccatiIdentityCheck(const SystemSpec& spec,
                                         const Eigen::MatrixXd& P,
                                         const Eigen::MatrixXd& K_true,
                                         int trials, double rel_tol,
                                         std::uint64_t seed = 0);

}  // namespace adaptive_lqr
