#pragma once

#include <complex>
#include <span>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// Complex H x W image stored as separate real and imaginary planes.
struct ComplexImage {
  Tensor real;
  Tensor imag;

  ComplexImage() = default;
  ComplexImage(Tensor re, Tensor im);
  static ComplexImage zeros(std::size_t height, std::size_t width);

  std::size_t height() const { return real.dim(0); }
  std::size_t width() const { return real.dim(1); }

  /// H x W x 2 real tensor, channel 0 = real, channel 1 = imag.
  Tensor pack() const;
  static ComplexImage unpack(const Tensor& packed);
};

bool is_power_of_two(std::size_t n);

/// In-place unnormalized radix-2 transform; `inverse` flips the exponent sign.
void fft_inplace(std::span<std::complex<double>> values, bool inverse);

/// Orthonormal 2D DFT (1/sqrt(HW) scaling), so fft2 is unitary.
ComplexImage fft2(const ComplexImage& img);
ComplexImage ifft2(const ComplexImage& img);

/// Packed H x W x 2 variants.
Tensor fft2_packed(const Tensor& packed);
Tensor ifft2_packed(const Tensor& packed);

}  // namespace scoreinv
