#pragma once

#include <optional>

#include <Eigen/Dense>

namespace adaptive_lqr {

// True plant x_{t+1} = A x_t + B u_t + eps_t with eps_t ~ N(0, sigma_eps^2 I)
// and stage cost x'Qx + u'Ru. The controller only ever sees this through
// simulated transitions (plus the cost weights, which are public).
struct SystemSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double sigma_eps = 1.0;
  Eigen::VectorXd x0;

  int n() const { return static_cast<int>(A.rows()); }
  int d() const { return static_cast<int>(B.cols()); }

  // Throws kInvalidInput on dimension mismatch, non-finite entries,
  // non-symmetric or non-positive-definite Q/R, or sigma_eps <= 0.
  void Validate() const;
};

struct DareOptions {
  double tol = 1e-12;
  int max_iters = 100000;
  // After reaching `tol`, continue while the residual keeps decreasing.
  bool polish = true;
};

struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  double residual = 0.0;  // relative, spectral norm
  int iterations = 0;
  double closed_loop_radius = 0.0;  // rho(A + B K)
};

// Max modulus over the eigenvalues of a square matrix.
double SpectralRadius(const Eigen::MatrixXd& M);

// Largest singular value.
double SpectralNorm(const Eigen::MatrixXd& M);

// ||P - Ric(P)||_2 / ||P||_2 where Ric is the right-hand side of the DARE.
double DareResidual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                    const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                    const Eigen::MatrixXd& R);

// K = -(R + B'PB)^{-1} B'PA. Throws kNumeric if R + B'PB is singular.
Eigen::MatrixXd OptimalGain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B, const Eigen::MatrixXd& R);

/// Solves the discrete algebraic Riccati equation
///
///   P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q
///
/// by fixed-point (value) iteration started at P_0 = Q. Iteration stops at the
/// first iterate whose relative residual is at most `opts.tol`. With
/// `opts.polish` the iteration then continues for as long as the residual
/// keeps shrinking, which takes P to roundoff level. The last accepted
/// iterate and the gain derived from it are returned.
///
/// Throws kNotStabilizable if the iteration does not converge within
/// `opts.max_iters`, blows up, or lands on a gain with rho(A+BK) >= 1.
/// Throws kInvalidInput if Q or R is not symmetric positive definite.
RiccatiSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const DareOptions& opts = {});

// Non-throwing variant for estimated systems: returns nullopt wherever
// SolveDare would report kNotStabilizable. Dimension errors still throw.
std::optional<RiccatiSolution> TrySolveDare(const Eigen::MatrixXd& A,
                                            const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& Q,
                                            const Eigen::MatrixXd& R,
                                            const DareOptions& opts = {});

// True iff rho(A + B K0) < 1 - margin.
bool CheckStabilizing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& K0, double margin = 0.0);

}  // namespace adaptive_lqr
