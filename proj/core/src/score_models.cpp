#include "scoreinv/score_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scoreinv/error.hpp"

namespace scoreinv {

IsotropicGaussianScore::IsotropicGaussianScore(Tensor mean, double tau2) : mean_(std::move(mean)), tau2_(tau2) {
  if (!(tau2_ > 0.0)) throw ParameterError("Gaussian prior variance must be positive");
  if (mean_.empty()) throw ShapeError("Gaussian prior mean is empty");
}

Tensor IsotropicGaussianScore::score(const Tensor& x, double sigma) const {
  return (mean_ - x) / (tau2_ + sigma * sigma);
}

double IsotropicGaussianScore::log_density(const Tensor& x, double sigma) const {
  const double s = tau2_ + sigma * sigma;
  const double d = static_cast<double>(x.size());
  return -0.5 * squared_norm(x - mean_) / s - 0.5 * d * std::log(2.0 * std::numbers::pi * s);
}

GaussianMixtureScore::GaussianMixtureScore(std::vector<double> weights, std::vector<Tensor> means,
                                           std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  if (weights_.empty()) throw ParameterError("mixture needs at least one component");
  if (weights_.size() != means_.size() || weights_.size() != variances_.size()) {
    throw ShapeError("mixture weights, means and variances differ in length");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ParameterError("mixture weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("mixture weights must sum to 1");
  for (double v : variances_) {
    if (!(v > 0.0)) throw ParameterError("mixture variances must be positive");
  }
  dim_ = means_.front().size();
  for (const auto& m : means_) {
    if (m.shape() != means_.front().shape()) throw ShapeError("mixture means differ in shape");
  }
}

double GaussianMixtureScore::component_logits(const Tensor& x, double sigma, std::vector<double>& logits) const {
  if (x.size() != dim_) throw ShapeError("mixture evaluated at a point of the wrong dimension");
  const double d = static_cast<double>(dim_);
  const double s2 = sigma * sigma;
  logits.resize(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double s = variances_[k] + s2;
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double diff = x[i] - means_[k][i];
      r2 += diff * diff;
    }
    logits[k] = std::log(weights_[k]) - 0.5 * r2 / s - 0.5 * d * std::log(2.0 * std::numbers::pi * s);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double acc = 0.0;
  for (double l : logits) acc += std::exp(l - top);
  return top + std::log(acc);
}

Tensor GaussianMixtureScore::score(const Tensor& x, double sigma) const {
  std::vector<double> logits;
  const double lse = component_logits(x, sigma, logits);
  Tensor out(x.shape());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double resp = std::exp(logits[k] - lse);
    if (resp == 0.0) continue;
    const double inv = resp / (variances_[k] + sigma * sigma);
    for (std::size_t i = 0; i < dim_; ++i) out[i] += inv * (means_[k][i] - x[i]);
  }
  return out;
}

double GaussianMixtureScore::log_density(const Tensor& x, double sigma) const {
  std::vector<double> logits;
  return component_logits(x, sigma, logits);
}

Tensor GaussianMixtureScore::sample(RngStream& rng, std::size_t count, double sigma) const {
  std::vector<double> cdf(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cdf.begin());
  Tensor out({count, dim_});
  for (std::size_t n = 0; n < count; ++n) {
    const double u = rng.uniform() * cdf.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const std::size_t comp = std::min(k, weights_.size() - 1);
    const double sd = std::sqrt(variances_[comp] + sigma * sigma);
    for (std::size_t i = 0; i < dim_; ++i) out[n * dim_ + i] = means_[comp][i] + sd * rng.gaussian();
  }
  return out;
}

GaussianMixtureScore make_two_moons(const TwoMoonsSpec& spec) {
  if (spec.per_arc < 2) throw ParameterError("two-moons needs at least 2 components per arc");
  if (!(spec.radius > 0.0) || !(spec.std > 0.0)) throw ParameterError("two-moons radius and std must be positive");
  const std::size_t k = spec.per_arc;
  std::vector<Tensor> means;
  const double r = spec.radius;
  for (std::size_t i = 0; i < k; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(k - 1);
    // Upper arc centred at the origin, lower arc shifted right and down.
    means.push_back(Tensor::vector({r * std::cos(theta), r * std::sin(theta)}));
    means.push_back(Tensor::vector({r - r * std::cos(theta), 0.5 * r - r * std::sin(theta)}));
  }
  // Centre the whole configuration on the origin.
  const double cx = 0.5 * r;
  const double cy = 0.25 * r;
  for (auto& m : means) {
    m[0] -= cx;
    m[1] -= cy;
  }
  const std::size_t n = means.size();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  // Renormalize so the weights sum to 1 to machine precision.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return GaussianMixtureScore(std::move(weights), std::move(means),
                              std::vector<double>(n, spec.std * spec.std));
}

}  // namespace scoreinv
