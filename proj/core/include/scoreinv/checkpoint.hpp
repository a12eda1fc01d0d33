#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "scoreinv/dsm.hpp"

namespace scoreinv {

/// Trained network plus everything needed to continue training.
///
/// DSMC layout (little-endian): "DSMC", u32 version, u32 layer count, then
/// per layer u32 rows, u32 cols, rows*cols f64 weights (column-major),
/// rows f64 biases, u8 layer tag; then the TrainConfig as f64 fields
/// (learning_rate, noise_scale, beta1, beta2, adam_epsilon, sigma_floor,
/// spectral_target, data_scale) and u64 fields (batch_size, steps, seed,
/// spectral_iters, output_scaling); then u64 step counter and the RNG state
/// as u64 seed, stream_id, counter.
struct Checkpoint {
  ScoreNetwork net;
  TrainConfig config;
  std::uint64_t step = 0;
  RngStream rng;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace scoreinv
