#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "lipsum/tensor.hpp"

namespace lipsum {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, stream id). Block b of a stream is
/// philox(counter = {b_lo, b_hi, id_lo, id_hi}, key = {seed_lo, seed_hi}).
/// Words are consumed in order x0, x1, x2, x3. Child streams come from
/// `fork(tag)`, whose id is splitmix64(id ^ (tag * 0x9E3779B97F4A7C15)).
/// Uniform doubles take the top 53 bits of (w0 << 32 | w1) from two consecutive
/// words; normals use Box-Muller on two uniforms (u1 mapped to (0, 1]).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng fork(std::uint64_t tag) const;

  std::uint32_t next_u32();
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  /// Gaussian vector rescaled to unit l_r norm.
  Eigen::VectorXd unit_vector(Eigen::Index n, NormKind r);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                 std::array<std::uint32_t, 2> key);
  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lipsum
