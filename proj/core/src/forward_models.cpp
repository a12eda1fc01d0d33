#include "scoreinv/forward_models.hpp"

#include <algorithm>
#include <cmath>

#include "scoreinv/error.hpp"

namespace scoreinv {

namespace {
void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " + shape_string(t.shape()));
  }
}

void require_binary(const Tensor& mask) {
  for (double v : mask.data()) {
    if (v != 0.0 && v != 1.0) throw ParameterError("mask entries must be 0 or 1");
  }
}
}  // namespace

IdentityOperator::IdentityOperator(Shape shape) : shape_(std::move(shape)) {}

Tensor IdentityOperator::apply(const Tensor& x) const {
  require_shape(x, shape_, "identity apply");
  return x;
}

Tensor IdentityOperator::adjoint(const Tensor& y) const {
  require_shape(y, shape_, "identity adjoint");
  return y;
}

PixelMaskOperator::PixelMaskOperator(Tensor mask) : mask_(std::move(mask)) { require_binary(mask_); }

Tensor PixelMaskOperator::apply(const Tensor& x) const {
  require_shape(x, mask_.shape(), "pixel mask apply");
  return hadamard(x, mask_);
}

Tensor PixelMaskOperator::adjoint(const Tensor& y) const {
  require_shape(y, mask_.shape(), "pixel mask adjoint");
  return hadamard(y, mask_);
}

MaskedFourierOperator::MaskedFourierOperator(Tensor centered_mask) : centered_(std::move(centered_mask)) {
  if (centered_.rank() != 2) throw ShapeError("k-space mask must be H x W");
  require_binary(centered_);
  height_ = centered_.dim(0);
  width_ = centered_.dim(1);
  if (!is_power_of_two(height_) || !is_power_of_two(width_)) {
    throw ParameterError("k-space mask dimensions must be powers of two");
  }
  // ifftshift: centred index (r, c) holds frequency (r - H/2, c - W/2).
  unshifted_ = Tensor({height_, width_});
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      const std::size_t fr = (r + height_ - height_ / 2) % height_;
      const std::size_t fc = (c + width_ - width_ / 2) % width_;
      unshifted_[fr * width_ + fc] = centered_[r * width_ + c];
    }
  }
}

MaskedFourierOperator MaskedFourierOperator::from_columns(const Tensor& column_mask, std::size_t height) {
  if (column_mask.rank() != 1) throw ShapeError("column mask must be one-dimensional");
  const std::size_t width = column_mask.size();
  Tensor mask({height, width});
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) mask[r * width + c] = column_mask[c];
  }
  return MaskedFourierOperator(std::move(mask));
}

Tensor MaskedFourierOperator::project_measurement(const Tensor& y) const {
  require_shape(y, input_shape(), "k-space measurement");
  Tensor out = y;
  for (std::size_t i = 0; i < unshifted_.size(); ++i) {
    out[2 * i] *= unshifted_[i];
    out[2 * i + 1] *= unshifted_[i];
  }
  return out;
}

Tensor MaskedFourierOperator::apply(const Tensor& x) const {
  require_shape(x, input_shape(), "masked Fourier apply");
  return project_measurement(fft2_packed(x));
}

Tensor MaskedFourierOperator::adjoint(const Tensor& y) const {
  return ifft2_packed(project_measurement(y));
}

double MaskedFourierOperator::sampled_fraction() const {
  double s = 0.0;
  for (double v : centered_.data()) s += v;
  return s / static_cast<double>(centered_.size());
}

BlurOperator::BlurOperator(Tensor kernel, Shape image_shape) : kernel_(std::move(kernel)), shape_(std::move(image_shape)) {
  if (kernel_.rank() != 2 || shape_.size() != 2) throw ShapeError("blur kernel and image must be 2-D");
  if (kernel_.dim(0) > shape_[0] || kernel_.dim(1) > shape_[1]) throw ShapeError("blur kernel larger than image");
}

Tensor BlurOperator::convolve(const Tensor& x, bool flip) const {
  const std::size_t h = shape_[0];
  const std::size_t w = shape_[1];
  const std::size_t kh = kernel_.dim(0);
  const std::size_t kw = kernel_.dim(1);
  const std::ptrdiff_t ch = static_cast<std::ptrdiff_t>(kh / 2);
  const std::ptrdiff_t cw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto sh = static_cast<std::ptrdiff_t>(h);
  const auto sw = static_cast<std::ptrdiff_t>(w);
  Tensor out(shape_);
  for (std::ptrdiff_t r = 0; r < sh; ++r) {
    for (std::ptrdiff_t c = 0; c < sw; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(kh); ++i) {
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(kw); ++j) {
          // Convolution reads x at (r - (i - ch)); the adjoint reads at (r + (i - ch)).
          const std::ptrdiff_t di = flip ? (i - ch) : -(i - ch);
          const std::ptrdiff_t dj = flip ? (j - cw) : -(j - cw);
          const std::ptrdiff_t sr = ((r + di) % sh + sh) % sh;
          const std::ptrdiff_t sc = ((c + dj) % sw + sw) % sw;
          acc += kernel_[static_cast<std::size_t>(i) * kw + static_cast<std::size_t>(j)] *
                 x[static_cast<std::size_t>(sr * sw + sc)];
        }
      }
      out[static_cast<std::size_t>(r * sw + c)] = acc;
    }
  }
  return out;
}

Tensor BlurOperator::apply(const Tensor& x) const {
  require_shape(x, shape_, "blur apply");
  return convolve(x, false);
}

Tensor BlurOperator::adjoint(const Tensor& y) const {
  require_shape(y, shape_, "blur adjoint");
  return convolve(y, true);
}

GaussianLikelihood::GaussianLikelihood(std::shared_ptr<const ForwardOperator> op, Tensor y, double sigma_n,
                                       Tempering tempering)
    : op_(std::move(op)), y_(std::move(y)), sigma_n_(sigma_n), approximate_(false) {
  if (!op_) throw ParameterError("likelihood needs a forward operator");
  if (!(sigma_n_ > 0.0)) throw ParameterError("measurement noise sigma_n must be positive");
  if (!op_->is_unitary_rows()) {
    if (tempering == Tempering::Exact) {
      throw ParameterError("tempered likelihood is exact only for operators with orthonormal rows; "
                           "request Tempering::Approximate explicitly");
    }
    approximate_ = true;
  }
  require_same_shape(op_->apply(Tensor(op_->input_shape())), y_, "measurement");
}

Tensor GaussianLikelihood::score(const Tensor& x, double sigma) const {
  Tensor residual = op_->apply(x);
  require_same_shape(y_, residual, "likelihood residual");
  residual = y_ - residual;
  return op_->adjoint(residual) / (sigma_n_ * sigma_n_ + sigma * sigma);
}

double GaussianLikelihood::log_density(const Tensor& x, double sigma) const {
  const Tensor ax = op_->apply(x);
  require_same_shape(y_, ax, "likelihood residual");
  return -0.5 * squared_norm(y_ - ax) / (sigma_n_ * sigma_n_ + sigma * sigma);
}

Tensor make_mask(const CartesianMaskSpec& spec, std::size_t width, RngStream& rng) {
  if (width < 8) throw ParameterError("mask width must be at least 8");
  if (spec.acceleration == 0) throw ParameterError("acceleration must be positive");
  if (!(spec.center_fraction >= 0.0 && spec.center_fraction < 1.0)) {
    throw ParameterError("center_fraction must lie in [0, 1)");
  }
  const double keep = 1.0 / static_cast<double>(spec.acceleration);
  if (spec.center_fraction > keep) {
    throw ParameterError("center_fraction exceeds 1/acceleration; mask is infeasible");
  }
  auto n_center = static_cast<std::size_t>(std::floor(spec.center_fraction * static_cast<double>(width)));
  if (spec.center_fraction > 0.0) n_center = std::max<std::size_t>(n_center, 1);

  const double expected_total = keep * static_cast<double>(width);
  const double p = std::clamp((expected_total - static_cast<double>(n_center)) /
                                  static_cast<double>(width - n_center),
                              0.0, 1.0);
  const std::size_t pad = (width - n_center + 1) / 2;
  Tensor mask({width});
  for (std::size_t c = 0; c < width; ++c) {
    const double u = rng.uniform();
    const bool center = c >= pad && c < pad + n_center;
    mask[c] = (center || u < p) ? 1.0 : 0.0;
  }
  return mask;
}

ComplexImage zero_filled(const GaussianLikelihood& lik) {
  if (dynamic_cast<const MaskedFourierOperator*>(&lik.op()) == nullptr) {
    throw ParameterError("zero-filled reconstruction requires a masked Fourier operator");
  }
  return ComplexImage::unpack(lik.op().adjoint(lik.measurement()));
}

Tensor simulate_measurement(const ForwardOperator& op, const Tensor& x_true, double sigma_n, RngStream& rng) {
  if (!(sigma_n >= 0.0)) throw ParameterError("sigma_n must be non-negative");
  Tensor y = op.apply(x_true);
  if (sigma_n == 0.0) return y;
  const Tensor noise = op.project_measurement(gaussian_sample(rng, y.shape()));
  return y.axpy(sigma_n, noise);
}

}  // namespace scoreinv
