#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "malalab/errors.hpp"

namespace malalab {

// Philox4x32-10 block cipher (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3", SC'11). Counter-based: output is a pure function of
// (counter, key), so streams can be split structurally instead of by jumping.
struct Philox4x32 {
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t pa = std::uint64_t(kMulA) * ctr[0];
      const std::uint64_t pb = std::uint64_t(kMulB) * ctr[2];
      const auto hi_a = std::uint32_t(pa >> 32), lo_a = std::uint32_t(pa);
      const auto hi_b = std::uint32_t(pb >> 32), lo_b = std::uint32_t(pb);
      ctr = {hi_b ^ ctr[1] ^ key[0], lo_b, hi_a ^ ctr[3] ^ key[1], lo_a};
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    return ctr;
  }
};

// One logical random stream, keyed by (seed, stream). Draws are addressed by
// (step, block index) through the Philox counter, which gives two properties
// the experiments rely on:
//   - the values produced for a given step never depend on how many values
//     earlier steps consumed, and
//   - distinct (seed, stream, step) triples index disjoint counter blocks,
//     so replicas and sub-experiments can be laid out structurally.
// Counter layout: {block_idx, step_lo32, stream_hi32, stream_lo32}; the seed
// is the cipher key. Steps above 2^32-1 are rejected rather than wrapped.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        stream_(stream) {
    set_step(0);
  }

  void set_step(std::uint64_t step) {
    if (step > 0xFFFFFFFFull) throw precondition_error("rng step index exceeds 2^32-1");
    step_ = std::uint32_t(step);
    block_idx_ = 0;
    buf_pos_ = 4;
    have_cached_normal_ = false;
  }

  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t step() const { return step_; }

  std::uint32_t next_u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are cached within a step.
  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(th);
    have_cached_normal_ = true;
    return r * std::cos(th);
  }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

 private:
  void refill() {
    buf_ = Philox4x32::block(
        {block_idx_, step_, std::uint32_t(stream_ >> 32), std::uint32_t(stream_)}, key_);
    ++block_idx_;
    buf_pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint32_t step_ = 0;
  std::uint32_t block_idx_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Fixed stream-id areas so independent parts of an experiment can never
// collide. Chain replica r uses stream_area::kChains + r, etc.
namespace stream_area {
inline constexpr std::uint64_t kChains = 0;
inline constexpr std::uint64_t kNoiseFloor = std::uint64_t(1) << 40;
inline constexpr std::uint64_t kBootstrap = std::uint64_t(2) << 40;
inline constexpr std::uint64_t kEstimators = std::uint64_t(3) << 40;
inline constexpr std::uint64_t kProbes = std::uint64_t(4) << 40;
inline constexpr std::uint64_t kWarmInit = std::uint64_t(5) << 40;
}

// SplitMix64-style finalizer; derives decorrelated sub-seeds for nested
// experiment parts (per-report, per-dimension, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}
