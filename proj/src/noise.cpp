#include "adaptive_lqr/noise.hpp"

#include <cmath>
#include <numbers>

namespace adaptive_lqr {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                    std::uint32_t* lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(p >> 32);
  *lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// 53-bit uniform in (0, 1].
inline double UniformOpenLow(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// 53-bit uniform in [0, 1).
inline double UniformClosedLow(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter Philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], &hi0, &lo0);
    MulHiLo(kPhiloxM1, ctr[2], &hi1, &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

NoiseStreams::NoiseStreams(std::uint64_t seed, std::uint64_t replicate_id)
    : seed_(seed), replicate_id_(replicate_id) {
  const std::uint64_t k = SplitMix64(SplitMix64(seed) ^ replicate_id);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void NoiseStreams::StandardNormal(StreamTag tag, std::uint64_t t,
                                  Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::Index size = out.size();
  for (Eigen::Index block = 0; 2 * block < size; ++block) {
    const PhiloxCounter ctr = {static_cast<std::uint32_t>(t),
                               static_cast<std::uint32_t>(t >> 32),
                               static_cast<std::uint32_t>(tag),
                               static_cast<std::uint32_t>(block)};
    const PhiloxCounter r = Philox4x32(ctr, key_);
    const std::uint64_t b0 = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
    const std::uint64_t b1 = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
    // Box-Muller.
    const double radius = std::sqrt(-2.0 * std::log(UniformOpenLow(b0)));
    const double angle = 2.0 * std::numbers::pi * UniformClosedLow(b1);
    out(2 * block) = radius * std::cos(angle);
    if (2 * block + 1 < size) out(2 * block + 1) = radius * std::sin(angle);
  }
}

Eigen::VectorXd NoiseStreams::StandardNormal(StreamTag tag, std::uint64_t t,
                                             Eigen::Index size) const {
  Eigen::VectorXd out(size);
  StandardNormal(tag, t, out);
  return out;
}

Eigen::VectorXd NoiseStreams::Eps(std::uint64_t t, Eigen::Index n, double sigma,
                                  StreamTag tag) const {
  return sigma * StandardNormal(tag, t, n);
}

Eigen::VectorXd NoiseStreams::EtaUnit(std::uint64_t t, Eigen::Index d) const {
  return StandardNormal(StreamTag::kEta, t, d);
}

}  // namespace adaptive_lqr
