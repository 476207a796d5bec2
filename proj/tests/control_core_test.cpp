#include "adaptive_lqr/control_core.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "adaptive_lqr/diagnostics.hpp"
#include "adaptive_lqr/errors.hpp"
#include "oracles/scalar_dare.hpp"

namespace adaptive_lqr {
namespace {

using Eigen::MatrixXd;

MatrixXd Scalar(double v) { return MatrixXd::Constant(1, 1, v); }

template <typename F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no adaptive_lqr::Error thrown";
  return ErrorKind::kIo;
}

// Random stabilizable instance: A with rho(A) in [0.2, 1.4], B dense.
struct RandomSystem {
  MatrixXd A, B, Q, R;
};

RandomSystem MakeRandomSystem(std::mt19937_64& gen, int n, int d) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> rho(0.2, 1.4);
  RandomSystem s;
  s.A = MatrixXd::NullaryExpr(n, n, [&] { return normal(gen); });
  s.A *= rho(gen) / SpectralRadius(s.A);
  s.B = MatrixXd::NullaryExpr(n, d, [&] { return normal(gen); });
  MatrixXd L = MatrixXd::NullaryExpr(n, n, [&] { return normal(gen); });
  s.Q = L * L.transpose() + 0.1 * MatrixXd::Identity(n, n);
  MatrixXd M = MatrixXd::NullaryExpr(d, d, [&] { return normal(gen); });
  s.R = M * M.transpose() + 0.1 * MatrixXd::Identity(d, d);
  return s;
}

TEST(SpectralRadiusTest, Examples) {
  MatrixXd A(2, 2);
  A << 0.5, 0.0, 0.0, -0.9;
  EXPECT_NEAR(SpectralRadius(A), 0.9, 1e-15);
  MatrixXd rot(2, 2);
  rot << 0.0, -0.8, 0.8, 0.0;  // eigenvalues +-0.8i
  EXPECT_NEAR(SpectralRadius(rot), 0.8, 1e-14);
  MatrixXd nil(2, 2);
  nil << 0.0, 1.0, 0.0, 0.0;
  EXPECT_EQ(SpectralRadius(nil), 0.0);
}

TEST(SpectralNormTest, MatchesSingularValue) {
  MatrixXd M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  EXPECT_NEAR(SpectralNorm(M), svd.singularValues()(0), 1e-12);
  EXPECT_NEAR(SpectralNorm(M.transpose()), svd.singularValues()(0), 1e-12);
}

TEST(SolveDareTest, ZeroDynamicsGivesQ) {
  const auto sol = SolveDare(Scalar(0.0), Scalar(1.0), Scalar(1.0), Scalar(1.0));
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sol.K(0, 0), 0.0, 1e-12);
}

TEST(SolveDareTest, NoInputGivesLyapunovSolution) {
  const auto sol = SolveDare(Scalar(0.5), Scalar(0.0), Scalar(1.0), Scalar(1.0));
  EXPECT_NEAR(sol.P(0, 0), 4.0 / 3.0, 1e-10);
  EXPECT_EQ(sol.K(0, 0), 0.0);
}

TEST(SolveDareTest, ScalarBenchmarkMatchesClosedForm) {
  // Positive root of p^2 - 0.25 p - 1 = 0 (a = 0.5, b = q = r = 1), from the
  // independent closed form; frozen here.
  constexpr double kP = 1.1327822185373186;
  constexpr double kK = -0.2655644370746374;
  const auto oracle = testing::SolveScalarDare(0.5, 1.0, 1.0, 1.0);
  ASSERT_TRUE(oracle);
  EXPECT_NEAR(oracle->p, kP, 1e-14);
  EXPECT_NEAR(oracle->k, kK, 1e-14);

  const auto sol = SolveDare(Scalar(0.5), Scalar(1.0), Scalar(1.0), Scalar(1.0));
  EXPECT_NEAR(sol.P(0, 0), kP, 1e-9);
  EXPECT_NEAR(sol.K(0, 0), kK, 1e-9);
  EXPECT_LE(sol.residual, 1e-12);
  EXPECT_NEAR(sol.closed_loop_radius, std::abs(0.5 + kK), 1e-9);
}

TEST(SolveDareTest, ScalarClosedFormOverParameterGrid) {
  for (double a : {-1.5, -0.9, 0.0, 0.3, 0.99, 1.2, 2.0}) {
    for (double b : {-2.0, -0.5, 0.7, 1.0, 3.0}) {
      for (double q : {0.1, 1.0, 5.0}) {
        for (double r : {0.2, 1.0, 4.0}) {
          const auto oracle = testing::SolveScalarDare(a, b, q, r);
          ASSERT_TRUE(oracle);
          const auto sol = SolveDare(Scalar(a), Scalar(b), Scalar(q), Scalar(r));
          EXPECT_NEAR(sol.P(0, 0), oracle->p, 1e-9 * std::max(1.0, oracle->p))
              << a << " " << b << " " << q << " " << r;
          EXPECT_NEAR(sol.K(0, 0), oracle->k, 1e-9 * std::max(1.0, std::abs(oracle->k)));
        }
      }
    }
  }
}

TEST(SolveDareTest, UnstableWithoutInputIsNotStabilizable) {
  EXPECT_EQ(KindOf([] { SolveDare(Scalar(1.2), Scalar(0.0), Scalar(1.0), Scalar(1.0)); }),
            ErrorKind::kNotStabilizable);
  EXPECT_FALSE(TrySolveDare(Scalar(1.2), Scalar(0.0), Scalar(1.0), Scalar(1.0)));
}

TEST(SolveDareTest, UncontrollableUnstableModeIsNotStabilizable) {
  MatrixXd A(2, 2);
  A << 1.1, 0.0, 0.0, 0.5;
  MatrixXd B(2, 1);
  B << 0.0, 1.0;
  EXPECT_EQ(KindOf([&] {
              SolveDare(A, B, MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1));
            }),
            ErrorKind::kNotStabilizable);
}

TEST(SolveDareTest, RejectsBadWeights) {
  EXPECT_EQ(KindOf([] { SolveDare(Scalar(0.5), Scalar(1.0), Scalar(-1.0), Scalar(1.0)); }),
            ErrorKind::kInvalidInput);
  EXPECT_EQ(KindOf([] { SolveDare(Scalar(0.5), Scalar(1.0), Scalar(1.0), Scalar(0.0)); }),
            ErrorKind::kInvalidInput);
  MatrixXd Q(2, 2);
  Q << 1.0, 0.5, 0.0, 1.0;  // not symmetric
  EXPECT_EQ(KindOf([&] {
              SolveDare(MatrixXd::Identity(2, 2) * 0.5, MatrixXd::Identity(2, 1), Q,
                        Scalar(1.0));
            }),
            ErrorKind::kInvalidInput);
  EXPECT_EQ(KindOf([] {
              SolveDare(MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 1),
                        MatrixXd::Identity(2, 2), Scalar(1.0));
            }),
            ErrorKind::kInvalidInput);
}

TEST(SolveDareTest, RandomSystemsSatisfyInvariants) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 5;
    const int d = 1 + trial % 3;
    const auto s = MakeRandomSystem(gen, n, d);
    const auto sol = SolveDare(s.A, s.B, s.Q, s.R);
    EXPECT_LE(DareResidual(sol.P, s.A, s.B, s.Q, s.R), 1e-10) << trial;
    EXPECT_LT(SpectralRadius(s.A + s.B * sol.K), 1.0) << trial;
    EXPECT_LE((sol.P - sol.P.transpose()).norm(), 1e-12 * sol.P.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatrixXd>(sol.P).eigenvalues().minCoeff(), 0.0);
    EXPECT_TRUE(sol.K.isApprox(OptimalGain(sol.P, s.A, s.B, s.R), 1e-12));
  }
}

TEST(SolveDareTest, ScalingCostScalesPAndKeepsK) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = MakeRandomSystem(gen, 3, 2);
    const double c = 0.1 + 0.5 * trial;
    const auto base = SolveDare(s.A, s.B, s.Q, s.R);
    const auto scaled = SolveDare(s.A, s.B, c * s.Q, c * s.R);
    EXPECT_LE((scaled.P - c * base.P).norm(), 1e-9 * c * base.P.norm());
    EXPECT_LE((scaled.K - base.K).norm(), 1e-9 * std::max(1.0, base.K.norm()));
  }
}

TEST(SolveDareTest, RiccatiIdentityHoldsAtSolution) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = MakeRandomSystem(gen, 1 + trial, 1 + trial % 2);
    SystemSpec spec{s.A, s.B, s.Q, s.R, 1.0, Eigen::VectorXd::Zero(s.A.rows())};
    const auto sol = SolveDare(s.A, s.B, s.Q, s.R);
    const auto check = RiccatiIdentityCheck(spec, sol.P, sol.K, 1000, 1e-8, trial);
    EXPECT_TRUE(check.passed) << check.max_error;
  }
}

TEST(OptimalGainTest, Examples) {
  // P = 1, A = 0.5, B = 1, R = 1: K = -0.5 / 2.
  EXPECT_NEAR(OptimalGain(Scalar(1.0), Scalar(0.5), Scalar(1.0), Scalar(1.0))(0, 0), -0.25,
              1e-15);
  EXPECT_EQ(OptimalGain(Scalar(2.0), Scalar(0.5), Scalar(0.0), Scalar(1.0))(0, 0), 0.0);
}

TEST(OptimalGainTest, SingularDenominatorIsNumericError) {
  // R + B'PB = 0 when R = 0 and B = 0.
  EXPECT_EQ(KindOf([] { OptimalGain(Scalar(1.0), Scalar(0.5), Scalar(0.0), Scalar(0.0)); }),
            ErrorKind::kNumeric);
}

TEST(CheckStabilizingTest, Examples) {
  EXPECT_TRUE(CheckStabilizing(Scalar(0.5), Scalar(1.0), Scalar(0.0)));
  EXPECT_FALSE(CheckStabilizing(Scalar(1.5), Scalar(1.0), Scalar(0.0)));
  EXPECT_TRUE(CheckStabilizing(Scalar(1.5), Scalar(1.0), Scalar(-1.0)));
  EXPECT_FALSE(CheckStabilizing(Scalar(1.0), Scalar(1.0), Scalar(0.0)));
  EXPECT_FALSE(CheckStabilizing(Scalar(0.5), Scalar(1.0), Scalar(0.0), 0.6));
}

TEST(DareResidualTest, ZeroAtFixedPointAndPositiveElsewhere) {
  const auto sol = SolveDare(Scalar(0.5), Scalar(1.0), Scalar(1.0), Scalar(1.0));
  EXPECT_LE(DareResidual(sol.P, Scalar(0.5), Scalar(1.0), Scalar(1.0), Scalar(1.0)), 1e-12);
  EXPECT_GT(DareResidual(Scalar(1.0), Scalar(0.5), Scalar(1.0), Scalar(1.0), Scalar(1.0)), 0.1);
}

}  // namespace
}  // namespace adaptive_lqr
