#include "adaptive_lqr/noise.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace adaptive_lqr {
namespace {

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(PhiloxTest, KnownAnswers) {
  EXPECT_EQ(Philox4x32({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(NoiseStreamsTest, RandomAccessIsReproducible) {
  const NoiseStreams a(7, 3), b(7, 3);
  EXPECT_EQ(a.Eps(1000, 5, 1.0), b.Eps(1000, 5, 1.0));
  EXPECT_EQ(a.EtaUnit(12, 3), b.EtaUnit(12, 3));
  // Order of access does not matter.
  const auto late = a.Eps(50, 2, 1.0);
  a.Eps(10, 2, 1.0);
  EXPECT_EQ(a.Eps(50, 2, 1.0), late);
}

TEST(NoiseStreamsTest, PrefixStableAcrossSizes) {
  const NoiseStreams s(1, 0);
  const auto short_draw = s.StandardNormal(StreamTag::kTest, 4, 3);
  const auto long_draw = s.StandardNormal(StreamTag::kTest, 4, 8);
  EXPECT_EQ(long_draw.head(3), short_draw);
}

TEST(NoiseStreamsTest, StreamsDiffer) {
  const NoiseStreams s(1, 0);
  const auto eps = s.StandardNormal(StreamTag::kEps, 9, 4);
  EXPECT_NE(eps, s.StandardNormal(StreamTag::kEta, 9, 4));
  EXPECT_NE(eps, s.StandardNormal(StreamTag::kEpsIndependent, 9, 4));
  EXPECT_NE(eps, s.StandardNormal(StreamTag::kEps, 10, 4));
  EXPECT_NE(eps, NoiseStreams(1, 1).StandardNormal(StreamTag::kEps, 9, 4));
  EXPECT_NE(eps, NoiseStreams(2, 0).StandardNormal(StreamTag::kEps, 9, 4));
}

TEST(NoiseStreamsTest, EpsScalesBySigma) {
  const NoiseStreams s(4, 4);
  EXPECT_TRUE(s.Eps(3, 4, 2.5).isApprox(2.5 * s.StandardNormal(StreamTag::kEps, 3, 4)));
}

TEST(NoiseStreamsTest, MomentsAndCrossCorrelation) {
  constexpr int kN = 40000;
  const NoiseStreams s(123, 0);
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (int t = 0; t < kN; ++t) {
    const double e = s.Eps(t, 1, 1.0)(0);
    const double h = s.EtaUnit(t, 1)(0);
    m1 += e;
    m2 += e * e;
    m4 += e * e * e * e;
    cross += e * h;
  }
  m1 /= kN;
  m2 /= kN;
  m4 /= kN;
  cross /= kN;
  // Bounds are roughly 5 standard errors.
  EXPECT_NEAR(m1, 0.0, 0.025);
  EXPECT_NEAR(m2, 1.0, 0.04);
  EXPECT_NEAR(m4, 3.0, 0.25);
  EXPECT_NEAR(cross, 0.0, 0.025);
}

TEST(NoiseStreamsTest, LargeTimeIndicesAreValid) {
  const NoiseStreams s(0, 0);
  const auto v = s.Eps((1ULL << 40) + 5, 3, 1.0);
  EXPECT_TRUE(v.allFinite());
  EXPECT_NE(v, s.Eps(5, 3, 1.0));
}

}  // namespace
}  // namespace adaptive_lqr
