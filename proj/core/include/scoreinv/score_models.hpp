#pragma once

#include <cstddef>
#include <vector>

#include "scoreinv/rng.hpp"
#include "scoreinv/tensor.hpp"

namespace scoreinv {

/// Noise-conditional score s(x, sigma) ~ grad_x log p_{sigma^2}(x), where
/// p_{sigma^2} is the data density convolved with N(0, sigma^2 I).
///
/// Implementations are immutable after construction and safe to evaluate
/// from concurrent chains.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  /// Returns a tensor of x.shape().
  virtual Tensor score(const Tensor& x, double sigma) const = 0;

  /// Length of the signal vector (dense models) or channel count
  /// (convolutional models, which accept any spatial size).
  virtual std::size_t dim() const = 0;
};

/// N(mean, tau2 I). Closed under Gaussian convolution: variance tau2 + sigma^2.
class IsotropicGaussianScore final : public ScoreModel {
 public:
  IsotropicGaussianScore(Tensor mean, double tau2);

  Tensor score(const Tensor& x, double sigma) const override;
  std::size_t dim() const override { return mean_.size(); }

  double log_density(const Tensor& x, double sigma) const;
  const Tensor& mean() const { return mean_; }
  double tau2() const { return tau2_; }

 private:
  Tensor mean_;
  double tau2_;
};

/// Mixture of isotropic Gaussians. Convolving with N(0, sigma^2 I) adds
/// sigma^2 to every component variance, so score and log density stay exact.
class GaussianMixtureScore final : public ScoreModel {
 public:
  GaussianMixtureScore(std::vector<double> weights, std::vector<Tensor> means, std::vector<double> variances);

  Tensor score(const Tensor& x, double sigma) const override;
  std::size_t dim() const override { return dim_; }

  /// Normalized log density of the convolved mixture.
  double log_density(const Tensor& x, double sigma) const;

  /// Draws `count` points from the sigma-convolved mixture as a count x dim tensor.
  Tensor sample(RngStream& rng, std::size_t count, double sigma = 0.0) const;

  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Tensor>& means() const { return means_; }
  const std::vector<double>& variances() const { return variances_; }

 private:
  // Per-component log(w_k N(x; mu_k, s_k I)) and the log-sum-exp over them.
  double component_logits(const Tensor& x, double sigma, std::vector<double>& logits) const;

  std::vector<double> weights_;
  std::vector<Tensor> means_;
  std::vector<double> variances_;
  std::size_t dim_ = 0;
};

struct TwoMoonsSpec {
  std::size_t per_arc = 16;
  double radius = 1.0;
  double std = 0.1;
};

/// Two interleaved half-circle arcs, each discretised into `per_arc` equally
/// weighted isotropic components.
GaussianMixtureScore make_two_moons(const TwoMoonsSpec& spec = {});

}  // namespace scoreinv
