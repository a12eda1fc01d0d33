#pragma once

#include <cstdint>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

struct PhantomSpec {
  std::size_t size = 32;
  std::size_t min_ellipses = 3;
  std::size_t max_ellipses = 7;
  double intensity_min = 0.1;
  double intensity_max = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// count x size x size batch of overlapping random ellipses with additive
/// intensities clipped to [0, 1]. Phantom i draws from RNG stream i, so any
/// index is reproducible on its own.
Tensor make_phantoms(const PhantomSpec& spec, std::size_t count, std::size_t first_index = 0);

}  // namespace scoreinv
