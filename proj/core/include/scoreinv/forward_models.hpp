#pragma once

#include <memory>

#include "scoreinv/fft.hpp"
#include "scoreinv/rng.hpp"
#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// Linear measurement map A with its adjoint.
class ForwardOperator {
 public:
  virtual ~ForwardOperator() = default;

  virtual Tensor apply(const Tensor& x) const = 0;
  virtual Tensor adjoint(const Tensor& y) const = 0;

  /// True when the rows of A (restricted to measured entries) are
  /// orthonormal, which makes the tempered likelihood exactly Gaussian.
  virtual bool is_unitary_rows() const = 0;

  /// Zeroes measurement entries that the operator never observes.
  virtual Tensor project_measurement(const Tensor& y) const { return y; }

  virtual Shape input_shape() const = 0;
};

class IdentityOperator final : public ForwardOperator {
 public:
  explicit IdentityOperator(Shape shape);
  Tensor apply(const Tensor& x) const override;
  Tensor adjoint(const Tensor& y) const override;
  bool is_unitary_rows() const override { return true; }
  Shape input_shape() const override { return shape_; }

 private:
  Shape shape_;
};

/// Inpainting: keeps the entries where mask == 1, zeroes the rest.
class PixelMaskOperator final : public ForwardOperator {
 public:
  explicit PixelMaskOperator(Tensor mask);
  Tensor apply(const Tensor& x) const override;
  Tensor adjoint(const Tensor& y) const override;
  bool is_unitary_rows() const override { return true; }
  Tensor project_measurement(const Tensor& y) const override { return apply(y); }
  Shape input_shape() const override { return mask_.shape(); }

 private:
  Tensor mask_;
};

/// y = M (F x) on H x W x 2 (real, imag) images with the orthonormal FFT.
///
/// The mask is given in centred k-space layout (DC at column W/2, row H/2)
/// as a binary H x W tensor; measurements use the unshifted FFT layout with
/// unobserved coefficients set to zero.
class MaskedFourierOperator final : public ForwardOperator {
 public:
  explicit MaskedFourierOperator(Tensor centered_mask);

  /// Broadcasts a length-W column mask over H rows.
  static MaskedFourierOperator from_columns(const Tensor& column_mask, std::size_t height);

  Tensor apply(const Tensor& x) const override;
  Tensor adjoint(const Tensor& y) const override;
  bool is_unitary_rows() const override { return true; }
  Tensor project_measurement(const Tensor& y) const override;
  Shape input_shape() const override { return {height_, width_, 2}; }

  const Tensor& centered_mask() const { return centered_; }
  /// Fraction of k-space coefficients observed.
  double sampled_fraction() const;

 private:
  Tensor centered_;
  Tensor unshifted_;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
};

/// Circular convolution of an H x W image with a small kernel centred at
/// (kh/2, kw/2). Not row-orthonormal.
class BlurOperator final : public ForwardOperator {
 public:
  BlurOperator(Tensor kernel, Shape image_shape);
  Tensor apply(const Tensor& x) const override;
  Tensor adjoint(const Tensor& y) const override;
  bool is_unitary_rows() const override { return false; }
  Shape input_shape() const override { return shape_; }

 private:
  Tensor convolve(const Tensor& x, bool flip) const;
  Tensor kernel_;
  Shape shape_;
};

enum class Tempering { Exact, Approximate };

/// y = A x + n, n ~ N(0, sigma_n^2). At temperature sigma the likelihood is
/// taken as N(y; A x, (sigma_n^2 + sigma^2) I), exact when A has orthonormal
/// rows. Non-orthonormal operators must opt in with Tempering::Approximate.
class GaussianLikelihood {
 public:
  GaussianLikelihood(std::shared_ptr<const ForwardOperator> op, Tensor y, double sigma_n,
                     Tempering tempering = Tempering::Exact);

  /// adjoint(y - A x) / (sigma_n^2 + sigma^2)
  Tensor score(const Tensor& x, double sigma) const;
  /// -||y - A x||^2 / (2 (sigma_n^2 + sigma^2)), up to an x-independent constant.
  double log_density(const Tensor& x, double sigma) const;

  bool approximate() const { return approximate_; }
  const ForwardOperator& op() const { return *op_; }
  const Tensor& measurement() const { return y_; }
  double sigma_n() const { return sigma_n_; }

 private:
  std::shared_ptr<const ForwardOperator> op_;
  Tensor y_;
  double sigma_n_;
  bool approximate_;
};

struct CartesianMaskSpec {
  std::size_t acceleration = 4;
  double center_fraction = 0.08;
};

/// Column mask of length `width` in centred layout: floor(center_fraction *
/// width) (at least one when the fraction is positive) central columns are
/// always kept; the rest are kept i.i.d. with the probability that makes the
/// expected kept fraction 1/acceleration.
Tensor make_mask(const CartesianMaskSpec& spec, std::size_t width, RngStream& rng);

/// Zero-filled reconstruction adjoint(y); requires a MaskedFourierOperator.
ComplexImage zero_filled(const GaussianLikelihood& lik);

/// apply(x_true) + sigma_n * noise, with noise restricted to observed entries.
Tensor simulate_measurement(const ForwardOperator& op, const Tensor& x_true, double sigma_n, RngStream& rng);

}  // namespace scoreinv
