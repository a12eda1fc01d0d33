#include "scoreinv/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "scoreinv/error.hpp"

namespace scoreinv {

double mean_squared_error(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean squared error");
  return squared_norm(a - b) / static_cast<double>(a.size());
}

double psnr(const Tensor& reference, const Tensor& estimate, double peak) {
  if (!(peak > 0.0)) throw ParameterError("PSNR peak must be positive");
  const double mse = mean_squared_error(reference, estimate);
  if (mse < peak * peak * 1e-16) return kPsnrCapDb;
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Tensor& reference, const Tensor& estimate) {
  const auto values = reference.data();
  return psnr(reference, estimate, *std::max_element(values.begin(), values.end()));
}

UncertaintyMap uncertainty_map(std::span<const Tensor> samples) {
  if (samples.size() < 2) throw ParameterError("uncertainty map needs at least 2 samples");
  const Shape& shape = samples.front().shape();
  UncertaintyMap map{Tensor(shape), Tensor(shape), samples.size()};
  for (const auto& s : samples) {
    if (s.shape() != shape) throw ShapeError("uncertainty map samples differ in shape");
    map.mean += s;
  }
  map.mean /= static_cast<double>(samples.size());
  // Deviations are taken from the first sample so identical samples give exactly zero.
  const double n = static_cast<double>(samples.size());
  const Tensor& ref = samples.front();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& s : samples) {
      const double d = s[i] - ref[i];
      sum += d;
      sq += d * d;
    }
    map.std[i] = std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1.0)));
  }
  return map;
}

Tensor magnitude(const Tensor& packed) {
  if (packed.rank() != 3 || packed.dim(2) != 2) throw ShapeError("magnitude expects H x W x 2");
  Tensor out({packed.dim(0), packed.dim(1)});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::hypot(packed[2 * i], packed[2 * i + 1]);
  return out;
}

Tensor to_complex(const Tensor& real_image) {
  if (real_image.rank() != 2) throw ShapeError("to_complex expects H x W");
  Tensor out({real_image.dim(0), real_image.dim(1), 2});
  for (std::size_t i = 0; i < real_image.size(); ++i) out[2 * i] = real_image[i];
  return out;
}

}  // namespace scoreinv
