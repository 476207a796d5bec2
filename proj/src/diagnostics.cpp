#include "adaptive_lqr/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "adaptive_lqr/errors.hpp"
#include "adaptive_lqr/noise.hpp"

namespace adaptive_lqr {

namespace {

Eigen::VectorXd CheckedEigenvalues(const Eigen::MatrixXd& M, const char* name) {
  if (M.rows() != M.cols()) ThrowInvalid(std::string(name) + " must be square");
  if (!M.allFinite()) ThrowInvalid(std::string(name) + " has non-finite entries");
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    ThrowInvalid(std::string(name) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.size() > 0 && lam(0) < -1e-8 * std::abs(M.trace())) {
    ThrowInvalid(std::string(name) + " is not positive semidefinite");
  }
  return lam;
}

Eigen::MatrixXd OrthonormalColumns(const Eigen::MatrixXd& M) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  return qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
}

double QuadForm(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  return v.dot(M * v);
}

}  // namespace

SubspaceProjectors MakeSubspaceProjectors(const Eigen::MatrixXd& K_true) {
  if (!K_true.allFinite()) ThrowInvalid("K has non-finite entries");
  const Eigen::Index d = K_true.rows();
  const Eigen::Index n = K_true.cols();
  Eigen::MatrixXd par(n + d, n);
  par << Eigen::MatrixXd::Identity(n, n), K_true;
  Eigen::MatrixXd perp(n + d, d);
  perp << -K_true.transpose(), Eigen::MatrixXd::Identity(d, d);
  return {OrthonormalColumns(par), OrthonormalColumns(perp)};
}

CheckpointDiag CheckpointDiagnostics(const Eigen::MatrixXd& gram,
                                     const Eigen::MatrixXd& delta_sum,
                                     const Eigen::MatrixXd& K_true,
                                     const EstimationErrors& errs) {
  const Eigen::Index d = K_true.rows();
  const Eigen::Index n = K_true.cols();
  if (gram.rows() != n + d) ThrowInvalid("gram must be (n+d) x (n+d)");
  if (delta_sum.rows() != d) ThrowInvalid("delta_sum must be d x d");
  CheckedEigenvalues(gram, "gram");
  const Eigen::VectorXd delta_eigs = CheckedEigenvalues(delta_sum, "delta_sum");

  const SubspaceProjectors proj = MakeSubspaceProjectors(K_true);
  const Eigen::MatrixXd g_par = proj.parallel.transpose() * gram * proj.parallel;
  const Eigen::MatrixXd g_perp =
      proj.perpendicular.transpose() * gram * proj.perpendicular;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_par(g_par,
                                                        Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_perp(
      g_perp, Eigen::EigenvaluesOnly);

  CheckpointDiag diag;
  diag.gram = gram;
  diag.lam_parallel = std::max(es_par.eigenvalues().minCoeff(), 0.0);
  diag.lam_perp = std::max(es_perp.eigenvalues().maxCoeff(), 0.0);
  diag.lam_delta = std::max(delta_eigs.maxCoeff(), 0.0);
  diag.est_err_theta = errs.theta;
  diag.est_err_K = errs.gain;
  return diag;
}

IdentitySides RiccatiIdentitySides(const SystemSpec& spec,
                                   const Eigen::MatrixXd& P,
                                   const Eigen::MatrixXd& K_true,
                                   const Eigen::MatrixXd& K_hat,
                                   const Eigen::VectorXd& x) {
  const Eigen::MatrixXd closed = spec.A + spec.B * K_hat;
  const Eigen::VectorXd ux = K_hat * x;
  const Eigen::VectorXd next = closed * x;
  const double t_q = QuadForm(spec.Q, x);
  const double t_r = QuadForm(spec.R, ux);
  const double t_next = QuadForm(P, next);
  const double t_p = QuadForm(P, x);

  const Eigen::MatrixXd S = spec.R + spec.B.transpose() * P * spec.B;
  const Eigen::VectorXd dk = (K_hat - K_true) * x;

  IdentitySides sides;
  sides.lhs = t_q + t_r + t_next - t_p;
  sides.rhs = QuadForm(S, dk);
  sides.scale = std::abs(t_q) + std::abs(t_r) + std::abs(t_next) +
                std::abs(t_p);
  return sides;
}

double IdentityDiscrepancy(const IdentitySides& sides) {
  const double diff = std::abs(sides.lhs - sides.rhs);
  const double mag = std::max(std::abs(sides.lhs), std::abs(sides.rhs));
  if (mag <= 1e-10 * sides.scale) {
    return sides.scale > 0.0 ? diff / sides.scale : diff;
  }
  return diff / mag;
}

IdentityCheckResult RiccatiIdentityCheck(const SystemSpec& spec,
                                         const Eigen::MatrixXd& P,
                                         const Eigen::MatrixXd& K_true,
                                         int trials, double rel_tol,
                                         std::uint64_t seed) {
  const NoiseStreams rng(seed, 0);
  const Eigen::Index n = spec.n();
  const Eigen::Index d = spec.d();
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Eigen::VectorXd draw =
        rng.StandardNormal(StreamTag::kTest, static_cast<std::uint64_t>(i),
                           n + d * n);
    const Eigen::VectorXd x = draw.head(n);
    const Eigen::MatrixXd K_hat =
        K_true + Eigen::Map<const Eigen::MatrixXd>(draw.tail(d * n).data(), d, n);
    worst = std::max(
        worst, IdentityDiscrepancy(RiccatiIdentitySides(spec, P, K_true, K_hat, x)));
  }
  return {worst, worst <= rel_tol};
}

}  // namespace adaptive_lqr
