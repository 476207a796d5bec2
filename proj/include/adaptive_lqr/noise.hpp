#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace adaptive_lqr {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Stateless: output depends only on (counter, key).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter Philox4x32(PhiloxCounter ctr, PhiloxKey key);

enum class StreamTag : std::uint32_t {
  kEps = 1,             // system noise
  kEta = 2,             // exploration noise
  kEpsIndependent = 3,  // system noise for the oracle in uncoupled mode
  kSystem = 4,          // random system generation
  kTest = 5,            // reserved for diagnostics and tests
};

// Deterministic Gaussian streams keyed by (seed, replicate_id, tag, t). Any
// index can be read at any time, in any order, from any thread.
class NoiseStreams {
 public:
  NoiseStreams(std::uint64_t seed, std::uint64_t replicate_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replicate_id() const { return replicate_id_; }

  // `size` i.i.d. standard normals for stream `tag` at index t.
  Eigen::VectorXd StandardNormal(StreamTag tag, std::uint64_t t,
                                 Eigen::Index size) const;
  void StandardNormal(StreamTag tag, std::uint64_t t,
                      Eigen::Ref<Eigen::VectorXd> out) const;

  // eps_t ~ N(0, sigma^2 I_n).
  Eigen::VectorXd Eps(std::uint64_t t, Eigen::Index n, double sigma,
                      StreamTag tag = StreamTag::kEps) const;
  // Unit-variance eta_t; scale by ExplorationStd(t, sigma_eta) at use.
  Eigen::VectorXd EtaUnit(std::uint64_t t, Eigen::Index d) const;

 private:
  std::uint64_t seed_;
  std::uint64_t replicate_id_;
  PhiloxKey key_;
};

}  // namespace adaptive_lqr
