#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace hyperrnn {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser; used to derive independent seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

/// Deterministic random stream.
///
/// The key is the 64-bit seed and the upper half of the 128-bit counter is
/// the stream id, so (seed, stream) pairs index disjoint sequences. Streams
/// can be handed to different threads without changing any sampled value.
/// Uniforms use 53 bits; normals use Box-Muller.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Circularly-symmetric complex normal with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

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

}  // namespace hyperrnn
