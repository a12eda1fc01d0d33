#include "scoreinv/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "scoreinv/error.hpp"

namespace scoreinv {

void write_pgm_preview(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 2) throw ShapeError("PGM preview expects an H x W tensor, got " + shape_string(image.shape()));
  const auto values = image.data();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi > lo ? hi - lo : 1.0;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << image.dim(1) << ' ' << image.dim(0) << "\n255\n";
  for (double v : values) {
    const double scaled = std::round(255.0 * (v - lo) / range);
    out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0))));
  }
  if (!out) throw IoError("write failed: " + path.string());

  auto sidecar_path = path;
  sidecar_path += ".txt";
  std::ofstream sidecar(sidecar_path, std::ios::trunc);
  if (!sidecar) throw IoError("cannot open for writing: " + sidecar_path.string());
  sidecar.precision(17);
  sidecar << "min " << lo << "\nmax " << hi << "\n";
}

}  // namespace scoreinv
