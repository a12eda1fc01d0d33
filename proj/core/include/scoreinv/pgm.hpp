#pragma once

#include <filesystem>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// Writes an H x W tensor as an 8-bit binary PGM (P5), linearly mapping
/// [min, max] onto [0, 255], plus a sidecar "<path>.txt" with the min/max.
void write_pgm_preview(const std::filesystem::path& path, const Tensor& image);

}  // namespace scoreinv
