#include "scoreinv/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scoreinv/error.hpp"
#include "scoreinv/rng.hpp"

namespace scoreinv {

void PhantomSpec::validate() const {
  if (size < 2) throw ParameterError("phantom.size must be at least 2");
  if (min_ellipses > max_ellipses) throw ParameterError("phantom.min_ellipses exceeds phantom.max_ellipses");
  if (!(intensity_min <= intensity_max)) throw ParameterError("phantom intensity range is empty");
}

Tensor make_phantoms(const PhantomSpec& spec, std::size_t count, std::size_t first_index) {
  spec.validate();
  if (count == 0) throw ParameterError("phantom count must be positive");
  const std::size_t n = spec.size;
  Tensor out({count, n, n});
  for (std::size_t p = 0; p < count; ++p) {
    RngStream rng(spec.seed, first_index + p);
    const std::size_t span = spec.max_ellipses - spec.min_ellipses + 1;
    const std::size_t ellipses =
        spec.min_ellipses + std::min(span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(span)));
    double* img = out.data().data() + p * n * n;
    for (std::size_t e = 0; e < ellipses; ++e) {
      // Coordinates normalized to [-1, 1]; the first ellipse is a large body.
      const bool body = e == 0;
      const double cx = body ? 0.2 * (rng.uniform() - 0.5) : 1.2 * (rng.uniform() - 0.5);
      const double cy = body ? 0.2 * (rng.uniform() - 0.5) : 1.2 * (rng.uniform() - 0.5);
      const double a = body ? 0.6 + 0.25 * rng.uniform() : 0.08 + 0.3 * rng.uniform();
      const double b = body ? 0.6 + 0.25 * rng.uniform() : 0.08 + 0.3 * rng.uniform();
      const double theta = std::numbers::pi * rng.uniform();
      const double value = spec.intensity_min + (spec.intensity_max - spec.intensity_min) * rng.uniform();
      const double ct = std::cos(theta);
      const double st = std::sin(theta);
      for (std::size_t r = 0; r < n; ++r) {
        const double y = 2.0 * (static_cast<double>(r) + 0.5) / static_cast<double>(n) - 1.0;
        for (std::size_t c = 0; c < n; ++c) {
          const double x = 2.0 * (static_cast<double>(c) + 0.5) / static_cast<double>(n) - 1.0;
          const double u = (x - cx) * ct + (y - cy) * st;
          const double v = -(x - cx) * st + (y - cy) * ct;
          if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) img[r * n + c] += value;
        }
      }
    }
    for (std::size_t i = 0; i < n * n; ++i) img[i] = std::clamp(img[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace scoreinv
