#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scoreinv/rng.hpp"
#include "scoreinv/score_network.hpp"
#include "scoreinv/tensor.hpp"

namespace scoreinv {

struct TrainConfig {
  double learning_rate = 1e-4;
  double lr_final_fraction = 1.0;  // cosine decay to lr * fraction; 1 keeps it constant
  double noise_scale = 1.0;  // s: sigma_s ~ N(0, s^2)
  std::size_t batch_size = 64;
  std::size_t steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double sigma_floor = 1e-3;
  std::uint64_t seed = 0;
  double spectral_target = 2.0;
  std::size_t spectral_iters = 1;
  bool output_scaling = true;
  double data_scale = 1.0;
  std::size_t workers = 1;  // runtime only, never serialized

  void validate() const;
};

/// Fixed noise for one batch: u has the batch's shape, sigma one entry per example.
struct NoiseDraw {
  Tensor u;
  std::vector<double> sigma;
};

NoiseDraw draw_dsm_noise(RngStream& rng, const Shape& batch_shape, double noise_scale);

struct LossAndGradient {
  double loss = 0.0;
  NetworkGradients grad;
};

/// Mean over the batch of ||u + sigma_s r(x + sigma_s u, sigma_s)||^2 in
/// network units, with exact parameter gradients. Examples are processed in
/// fixed-size chunks whose gradients are summed in index order, so the
/// result does not depend on `workers`.
LossAndGradient dsm_loss_and_gradient(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise,
                                      std::size_t workers = 1);
double dsm_loss(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise);
LossAndGradient dsm_loss_and_gradient(const ScoreNetwork& net, const Tensor& batch, RngStream& rng,
                                      double noise_scale);

/// Largest elementwise |analytic - central difference| / max(|analytic|, |numeric|, 1)
/// over the parameters (every `stride`-th one when stride > 1).
double backprop_check(ScoreNetwork net, const Tensor& batch, const NoiseDraw& noise, double h = 1e-5,
                      std::size_t stride = 1);

/// Power iteration on `weight` (iters rounds, warm-started from `u`), then
/// rescales so the spectral norm becomes min(current, target). Returns the
/// estimated norm before rescaling.
double spectral_normalize(Eigen::MatrixXd& weight, double target, int iters, Eigen::VectorXd& u);
Eigen::MatrixXd spectral_normalize(const Eigen::MatrixXd& weight, double target, int iters);
void spectral_normalize_network(ScoreNetwork& net, double target, int iters);

struct TrainState {
  std::uint64_t step = 0;
  RngStream rng;
};

struct TrainResult {
  ScoreNetwork net;
  std::vector<double> losses;
  TrainState state;
};

using StepCallback = std::function<void(std::uint64_t step, double loss)>;

/// Runs cfg.steps Adam updates of the DSM loss on `dataset` (N x signal
/// shape, data units), projecting every weight matrix onto the spectral
/// ball after each update. Deterministic given cfg.seed (or `resume`).
/// Throws NumericalError naming the step if the loss becomes non-finite.
TrainResult train(ScoreNetwork net, const Tensor& dataset, const TrainConfig& cfg,
                  std::optional<TrainState> resume = std::nullopt, const StepCallback& on_step = {});

}  // namespace scoreinv
