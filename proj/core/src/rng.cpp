#include "scoreinv/rng.hpp"

#include <cmath>
#include <numbers>

namespace scoreinv {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
inline std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {hi32(p1) ^ ctr[1] ^ key[0], lo32(p1), hi32(p0) ^ ctr[3] ^ key[1], lo32(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

RngStream RngStream::at(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter) {
  RngStream r(seed, stream_id);
  r.counter_ = counter;
  return r;
}

std::uint64_t RngStream::next_u64() {
  // Block index and stream id form the 128-bit counter; the seed is the key.
  // Each block yields two words.
  const std::uint64_t block = counter_ >> 1;
  const auto out = philox4x32({lo32(block), hi32(block), lo32(stream_id_), hi32(stream_id_)},
                              {lo32(seed_), hi32(seed_)});
  const bool second = (counter_ & 1u) != 0;
  ++counter_;
  return second ? (std::uint64_t{out[3]} << 32) | out[2] : (std::uint64_t{out[1]} << 32) | out[0];
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open_low() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::gaussian() {
  // Box-Muller, one output per pair of uniforms so the stream position is a
  // simple function of the number of draws.
  const double u1 = uniform_open_low();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor gaussian_sample(RngStream& rng, const Shape& shape) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.gaussian();
  return t;
}

}  // namespace scoreinv
