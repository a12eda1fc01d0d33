#pragma once

#include <span>

#include "scoreinv/tensor.hpp"

namespace scoreinv {

inline constexpr double kPsnrCapDb = 160.0;

/// 10 log10(peak^2 / MSE) in dB, capped at 160 dB when MSE < peak^2 * 1e-16.
double psnr(const Tensor& reference, const Tensor& estimate, double peak);

/// PSNR with peak = max(reference).
double psnr(const Tensor& reference, const Tensor& estimate);

double mean_squared_error(const Tensor& a, const Tensor& b);

struct UncertaintyMap {
  Tensor mean;
  Tensor std;  // unbiased (n - 1) pixelwise standard deviation
  std::size_t n_samples = 0;
};

/// Pixelwise mean and unbiased std across at least two equally shaped samples.
UncertaintyMap uncertainty_map(std::span<const Tensor> samples);

/// |re + i im| of an H x W x 2 packed complex image, as H x W.
Tensor magnitude(const Tensor& packed);

/// Real H x W image as H x W x 2 with zero imaginary part.
Tensor to_complex(const Tensor& real_image);

}  // namespace scoreinv
