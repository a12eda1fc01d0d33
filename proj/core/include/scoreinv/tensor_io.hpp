#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// TNSR container: "TNSR", u32 version (1), u32 rank, rank x u64 dims,
/// little-endian f64 payload in row-major order.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

namespace io {
// Little-endian primitives shared by the TNSR and DSMC formats.
void put_u8(std::ostream& out, std::uint8_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint8_t get_u8(std::istream& in);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
}  // namespace io

}  // namespace scoreinv
