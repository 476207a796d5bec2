#include "adaptive_lqr/sysid.hpp"

#include <cmath>

#include "adaptive_lqr/errors.hpp"

namespace adaptive_lqr {

RegressionState::RegressionState(int n, int d) : n_(n), d_(d) {
  if (n < 1 || d < 1) {
    ThrowInvalid("regression dimensions must be positive");
  }
  gram_ = Eigen::MatrixXd::Zero(n + d, n + d);
  cross_ = Eigen::MatrixXd::Zero(n, n + d);
  z_ = Eigen::VectorXd::Zero(n + d);
}

void RegressionState::Record(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u,
                             const Eigen::VectorXd& x_next) {
  if (x.size() != n_ || u.size() != d_ || x_next.size() != n_) {
    ThrowInvalid("transition dimensions do not match the regression");
  }
  if (!x.allFinite() || !u.allFinite() || !x_next.allFinite()) {
    ThrowInvalid("transition has non-finite entries");
  }
  z_.head(n_) = x;
  z_.tail(d_) = u;
  gram_.noalias() += z_ * z_.transpose();
  cross_.noalias() += x_next * z_.transpose();
  ++count_;
}

Eigen::MatrixXd ThetaEstimate::Theta() const {
  Eigen::MatrixXd theta(A_hat.rows(), A_hat.cols() + B_hat.cols());
  theta << A_hat, B_hat;
  return theta;
}

ThetaEstimate SolveTheta(const RegressionState& state, double rank_tol) {
  if (state.count() == 0) {
    throw Error(ErrorKind::kNoData, "no transitions recorded");
  }
  if (!(rank_tol >= 0.0)) ThrowInvalid("rank_tol must be non-negative");

  const int n = state.n();
  const int d = state.d();
  const Eigen::MatrixXd& gram = state.gram();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumeric, "Gram eigendecomposition failed");
  }
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXd& V = es.eigenvectors();
  const double mean_eig = gram.trace() / state.dim_z();

  ThetaEstimate est;
  est.gram_min_eig = lam(0);
  est.identifiable = mean_eig > 0.0 && lam(0) > 0.0 &&
                     lam(0) >= rank_tol * mean_eig;

  Eigen::MatrixXd theta;
  if (est.identifiable) {
    theta = gram.llt().solve(state.cross().transpose()).transpose();
  } else {
    // Minimum-norm minimizer through the pseudo-inverse.
    const double cutoff = rank_tol * mean_eig;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) > cutoff && lam(i) > 0.0) inv(i) = 1.0 / lam(i);
    }
    theta = (state.cross() * V) * inv.asDiagonal() * V.transpose();
  }
  est.A_hat = theta.leftCols(n);
  est.B_hat = theta.rightCols(d);
  return est;
}

Eigen::MatrixXd GramSnapshot(const RegressionState& state) {
  return state.gram();
}

}  // namespace adaptive_lqr
