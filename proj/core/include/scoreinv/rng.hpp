#pragma once

#include <array>
#include <cstdint>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// Counter-based random stream (Philox4x32-10).
///
/// The output is a pure function of (seed, stream_id, counter), so streams
/// are reproducible bit-for-bit on every platform and independent streams
/// need no shared state.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t counter() const { return counter_; }

  /// Restores a stream at an arbitrary position.
  static RngStream at(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low();
  double gaussian();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

/// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

Tensor gaussian_sample(RngStream& rng, const Shape& shape);

}  // namespace scoreinv
