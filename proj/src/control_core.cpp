#include "adaptive_lqr/control_core.hpp"

#include <cmath>
#include <string>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

namespace {

void RequireFinite(const Eigen::MatrixXd& M, const char* name) {
  if (!M.allFinite()) ThrowInvalid(std::string(name) + " has non-finite entries");
}

void RequireShape(const Eigen::MatrixXd& M, Eigen::Index rows,
                  Eigen::Index cols, const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    ThrowInvalid(std::string(name) + " must be " + std::to_string(rows) + "x" +
                 std::to_string(cols) + ", got " + std::to_string(M.rows()) +
                 "x" + std::to_string(M.cols()));
  }
}

void RequireSpd(const Eigen::MatrixXd& M, const char* name) {
  RequireFinite(M, name);
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    ThrowInvalid(std::string(name) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues()(0) <= 0.0) {
    ThrowInvalid(std::string(name) + " is not positive definite");
  }
}

void CheckDareShapes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  if (n == 0) ThrowInvalid("A must be non-empty");
  RequireShape(A, n, n, "A");
  if (B.rows() != n || B.cols() == 0) ThrowInvalid("B must be n x d, d >= 1");
  RequireShape(Q, n, n, "Q");
  RequireShape(R, B.cols(), B.cols(), "R");
  RequireFinite(A, "A");
  RequireFinite(B, "B");
}

// One application of the Riccati map; also hands back the gain of P.
Eigen::MatrixXd RiccatiMap(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                           const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R, Eigen::MatrixXd* gain) {
  const Eigen::MatrixXd BtP = B.transpose() * P;
  const Eigen::MatrixXd S = R + BtP * B;
  const Eigen::MatrixXd BtPA = BtP * A;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw Error(ErrorKind::kNumeric, "R + B'PB is not invertible");
  }
  Eigen::MatrixXd F = ldlt.solve(BtPA);
  Eigen::MatrixXd next = A.transpose() * P * A - BtPA.transpose() * F + Q;
  next = 0.5 * (next + next.transpose());
  if (gain != nullptr) *gain = -F;
  return next;
}

}  // namespace

void SystemSpec::Validate() const {
  const Eigen::Index n = A.rows();
  if (n < 1) ThrowInvalid("state dimension must be positive");
  if (B.cols() < 1) ThrowInvalid("control dimension must be positive");
  RequireShape(A, n, n, "A");
  RequireShape(B, n, B.cols(), "B");
  RequireShape(Q, n, n, "Q");
  RequireShape(R, B.cols(), B.cols(), "R");
  RequireFinite(A, "A");
  RequireFinite(B, "B");
  RequireSpd(Q, "Q");
  RequireSpd(R, "R");
  if (!(sigma_eps > 0.0) || !std::isfinite(sigma_eps)) {
    ThrowInvalid("sigma_eps must be positive");
  }
  if (x0.size() != n) ThrowInvalid("x0 must have length n");
  if (!x0.allFinite()) ThrowInvalid("x0 has non-finite entries");
}

double SpectralRadius(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) ThrowInvalid("spectral radius needs a square matrix");
  RequireFinite(M, "matrix");
  if (M.rows() == 0) return 0.0;
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumeric, "eigenvalue computation failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double SpectralNorm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  // sigma_max^2 = lambda_max of the smaller Gram product.
  const Eigen::MatrixXd G =
      M.rows() <= M.cols() ? Eigen::MatrixXd(M * M.transpose())
                           : Eigen::MatrixXd(M.transpose() * M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

double DareResidual(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                    const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                    const Eigen::MatrixXd& R) {
  CheckDareShapes(A, B, Q, R);
  RequireShape(P, A.rows(), A.rows(), "P");
  const Eigen::MatrixXd next = RiccatiMap(P, A, B, Q, R, nullptr);
  const double p_norm = SpectralNorm(P);
  if (p_norm == 0.0) return SpectralNorm(next);
  return SpectralNorm(P - next) / p_norm;
}

Eigen::MatrixXd OptimalGain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  RequireShape(A, n, n, "A");
  RequireShape(P, n, n, "P");
  if (B.rows() != n) ThrowInvalid("B must have n rows");
  RequireShape(R, B.cols(), B.cols(), "R");
  const Eigen::MatrixXd BtP = B.transpose() * P;
  const Eigen::MatrixXd S = R + BtP * B;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kNumeric, "R + B'PB is singular");
  }
  return -lu.solve(BtP * A);
}

constexpr int kMaxPolishIters = 64;

std::optional<RiccatiSolution> TrySolveDare(const Eigen::MatrixXd& A,
                                            const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& Q,
                                            const Eigen::MatrixXd& R,
                                            const DareOptions& opts) {
  CheckDareShapes(A, B, Q, R);
  RequireSpd(Q, "Q");
  RequireSpd(R, "R");
  if (!(opts.tol > 0.0)) ThrowInvalid("DARE tolerance must be positive");
  if (opts.max_iters < 1) ThrowInvalid("DARE max_iters must be positive");

  Eigen::MatrixXd P = Q;
  Eigen::MatrixXd K;
  for (int it = 0; it < opts.max_iters; ++it) {
    Eigen::MatrixXd next;
    try {
      next = RiccatiMap(P, A, B, Q, R, &K);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (!next.allFinite()) return std::nullopt;

    // Frobenius screen first; the spectral residual is only evaluated for
    // candidates that already look converged.
    const double diff_f = (P - next).norm();
    const double p_f = P.norm();
    if (diff_f <= opts.tol * p_f) {
      double residual = SpectralNorm(P - next) / SpectralNorm(P);
      if (residual <= opts.tol) {
        int iterations = it;
        // Keep iterating while the residual still drops, down to roundoff.
        for (int extra = 0; opts.polish && extra < kMaxPolishIters; ++extra) {
          Eigen::MatrixXd K_next;
          Eigen::MatrixXd after;
          try {
            after = RiccatiMap(next, A, B, Q, R, &K_next);
          } catch (const Error&) {
            break;
          }
          if (!after.allFinite()) break;
          const double r = SpectralNorm(next - after) / SpectralNorm(next);
          if (!(r < residual)) break;
          P = std::move(next);
          next = std::move(after);
          K = std::move(K_next);
          residual = r;
          ++iterations;
        }
        RiccatiSolution sol;
        sol.P = std::move(P);
        sol.K = std::move(K);
        sol.residual = residual;
        sol.iterations = iterations;
        sol.closed_loop_radius = SpectralRadius(A + B * sol.K);
        if (!(sol.closed_loop_radius < 1.0)) return std::nullopt;
        return sol;
      }
    }
    P = std::move(next);
  }
  return std::nullopt;
}

RiccatiSolution SolveDare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const DareOptions& opts) {
  auto sol = TrySolveDare(A, B, Q, R, opts);
  if (!sol) {
    throw Error(ErrorKind::kNotStabilizable,
                "DARE fixed-point iteration did not converge to a stabilizing "
                "solution within " +
                    std::to_string(opts.max_iters) + " iterations");
  }
  return *std::move(sol);
}

bool CheckStabilizing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& K0, double margin) {
  const Eigen::Index n = A.rows();
  RequireShape(A, n, n, "A");
  if (B.rows() != n) ThrowInvalid("B must have n rows");
  RequireShape(K0, B.cols(), n, "K0");
  if (!(margin >= 0.0)) ThrowInvalid("margin must be non-negative");
  return SpectralRadius(A + B * K0) < 1.0 - margin;
}

}  // namespace adaptive_lqr
