#pragma once

#include <Eigen/Dense>

namespace adaptive_lqr {

// Exact running sums for unregularized least squares on
//   x_{k+1} ~ [A B] z_k,   z_k = [x_k; u_k].
// Single owner; copies are deep.
class RegressionState {
 public:
  // Throws kInvalidInput unless n >= 1 and d >= 1.
  RegressionState(int n, int d);

  // gram += z z', cross += x_next z', count += 1.
  void Record(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
              const Eigen::VectorXd& x_next);

  int n() const { return n_; }
  int d() const { return d_; }
  int dim_z() const { return n_ + d_; }
  long long count() const { return count_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& cross() const { return cross_; }

 private:
  int n_;
  int d_;
  Eigen::MatrixXd gram_;   // (n+d) x (n+d)
  Eigen::MatrixXd cross_;  // n x (n+d)
  Eigen::VectorXd z_;      // scratch
  long long count_ = 0;
};

struct ThetaEstimate {
  Eigen::MatrixXd A_hat;
  Eigen::MatrixXd B_hat;
  double gram_min_eig = 0.0;
  bool identifiable = false;

  // [A_hat, B_hat]
  Eigen::MatrixXd Theta() const;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Least-squares estimate of [A, B] from the recorded transitions.
///
/// When lambda_min(gram) >= rank_tol * trace(gram) / dim_z the minimizer is
/// unique and equals cross * gram^{-1}. Otherwise `identifiable` is false and
/// the minimum-norm minimizer (pseudo-inverse) is returned for diagnostics.
/// Throws kNoData if nothing has been recorded.
ThetaEstimate SolveTheta(const RegressionState& state,
                         double rank_tol = kDefaultRankTol);

// Copy of the current Gram matrix.
Eigen::MatrixXd GramSnapshot(const RegressionState& state);

}  // namespace adaptive_lqr
