#include "scoreinv/fft.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "scoreinv/error.hpp"

namespace scoreinv {

ComplexImage::ComplexImage(Tensor re, Tensor im) : real(std::move(re)), imag(std::move(im)) {
  if (real.rank() != 2) throw ShapeError("ComplexImage expects H x W planes, got " + shape_string(real.shape()));
  require_same_shape(real, imag, "ComplexImage");
}

ComplexImage ComplexImage::zeros(std::size_t height, std::size_t width) {
  return ComplexImage(Tensor({height, width}), Tensor({height, width}));
}

Tensor ComplexImage::pack() const {
  const std::size_t n = real.size();
  Tensor out({height(), width(), 2});
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = real[i];
    out[2 * i + 1] = imag[i];
  }
  return out;
}

ComplexImage ComplexImage::unpack(const Tensor& packed) {
  if (packed.rank() != 3 || packed.dim(2) != 2) {
    throw ShapeError("expected H x W x 2 tensor, got " + shape_string(packed.shape()));
  }
  auto img = zeros(packed.dim(0), packed.dim(1));
  for (std::size_t i = 0; i < img.real.size(); ++i) {
    img.real[i] = packed[2 * i];
    img.imag[i] = packed[2 * i + 1];
  }
  return img;
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::span<std::complex<double>> a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw ParameterError("FFT length must be a power of two, got " + std::to_string(n));
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles from the exact angle rather than a running product.
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

namespace {

ComplexImage transform2(const ComplexImage& img, bool inverse) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  if (!is_power_of_two(h) || !is_power_of_two(w)) {
    throw ParameterError("fft2 requires power-of-two dimensions, got " + shape_string(img.real.shape()));
  }
  std::vector<std::complex<double>> buf(h * w);
  for (std::size_t i = 0; i < h * w; ++i) buf[i] = {img.real[i], img.imag[i]};

  for (std::size_t r = 0; r < h; ++r) fft_inplace(std::span(buf).subspan(r * w, w), inverse);
  std::vector<std::complex<double>> col(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col[r] = buf[r * w + c];
    fft_inplace(col, inverse);
    for (std::size_t r = 0; r < h; ++r) buf[r * w + c] = col[r];
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
  auto out = ComplexImage::zeros(h, w);
  for (std::size_t i = 0; i < h * w; ++i) {
    out.real[i] = buf[i].real() * scale;
    out.imag[i] = buf[i].imag() * scale;
  }
  return out;
}

}  // namespace

ComplexImage fft2(const ComplexImage& img) { return transform2(img, false); }
ComplexImage ifft2(const ComplexImage& img) { return transform2(img, true); }

Tensor fft2_packed(const Tensor& packed) { return fft2(ComplexImage::unpack(packed)).pack(); }
Tensor ifft2_packed(const Tensor& packed) { return ifft2(ComplexImage::unpack(packed)).pack(); }

}  // namespace scoreinv
