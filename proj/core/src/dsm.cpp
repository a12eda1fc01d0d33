#include "scoreinv/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scoreinv/error.hpp"
#include "scoreinv/parallel.hpp"

namespace scoreinv {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ParameterError(std::string("train.") + name + " must be positive");
  };
  positive(learning_rate, "learning_rate");
  positive(lr_final_fraction, "lr_final_fraction");
  if (lr_final_fraction > 1.0) throw ParameterError("train.lr_final_fraction must be at most 1");
  positive(noise_scale, "noise_scale");
  positive(adam_epsilon, "adam_epsilon");
  positive(sigma_floor, "sigma_floor");
  positive(spectral_target, "spectral_target");
  positive(data_scale, "data_scale");
  if (batch_size == 0) throw ParameterError("train.batch_size must be positive");
  if (spectral_iters == 0) throw ParameterError("train.spectral_iters must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ParameterError("Adam betas must lie in [0, 1)");
  }
}

NoiseDraw draw_dsm_noise(RngStream& rng, const Shape& batch_shape, double noise_scale) {
  NoiseDraw noise;
  noise.u = gaussian_sample(rng, batch_shape);
  noise.sigma.resize(batch_shape.at(0));
  for (double& s : noise.sigma) s = noise_scale * rng.gaussian();
  return noise;
}

namespace {

// Dense chunks batch this many examples into one matrix product.
constexpr std::size_t kDenseChunk = 32;

struct ChunkResult {
  double loss = 0.0;
  NetworkGradients grad;
};

void check_batch(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise) {
  if (batch.rank() < 2) throw ShapeError("DSM batch must be N x signal, got " + shape_string(batch.shape()));
  require_same_shape(batch, noise.u, "DSM noise");
  if (noise.sigma.size() != batch.dim(0)) throw ShapeError("DSM noise sigma count differs from batch size");
  const std::size_t per = batch.size() / batch.dim(0);
  if (net.convolutional()) {
    if (batch.rank() != 4 || batch.dim(3) != net.dim()) {
      throw ShapeError("conv DSM batch must be N x H x W x " + std::to_string(net.dim()));
    }
  } else if (per != net.dim()) {
    throw ShapeError("dense DSM batch rows must have " + std::to_string(net.dim()) + " values");
  }
}

// Loss (sum over examples, not yet averaged) and optionally gradients for
// examples [first, last).
ChunkResult chunk_loss(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise, std::size_t first,
                       std::size_t last, bool with_grad, double grad_scale) {
  ChunkResult result;
  if (with_grad) result.grad = net.zero_gradients();
  const double c = net.options().data_scale;
  const std::size_t per = batch.size() / batch.dim(0);
  const auto channels = static_cast<Eigen::Index>(net.dim());

  if (net.convolutional()) {
    const int height = static_cast<int>(batch.dim(1));
    const int width = static_cast<int>(batch.dim(2));
    const Eigen::Index positions = Eigen::Index{height} * width;
    for (std::size_t n = first; n < last; ++n) {
      const double sigma = noise.sigma[n];
      Eigen::Map<const Eigen::MatrixXd> x(batch.data().data() + n * per, channels, positions);
      Eigen::Map<const Eigen::MatrixXd> u(noise.u.data().data() + n * per, channels, positions);
      Eigen::MatrixXd input(channels + 1, positions);
      input.topRows(channels) = x / c + sigma * u;
      input.row(channels).setConstant(sigma);
      ScoreNetwork::Trace trace;
      const Eigen::MatrixXd raw = net.forward(input, height, width, with_grad ? &trace : nullptr);
      const double mult = sigma / net.output_divisor(sigma);
      const Eigen::MatrixXd residual = u + mult * raw;
      result.loss += residual.squaredNorm();
      if (with_grad) {
        const Eigen::MatrixXd d_raw = (2.0 * grad_scale * mult) * residual;
        net.backward(trace, d_raw, height, width, result.grad);
      }
    }
    return result;
  }

  const auto count = static_cast<Eigen::Index>(last - first);
  Eigen::Map<const Eigen::MatrixXd> x(batch.data().data() + first * per, channels, count);
  Eigen::Map<const Eigen::MatrixXd> u(noise.u.data().data() + first * per, channels, count);
  Eigen::MatrixXd input(channels + 1, count);
  Eigen::RowVectorXd mult(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const double sigma = noise.sigma[first + static_cast<std::size_t>(j)];
    input.col(j).head(channels) = x.col(j) / c + sigma * u.col(j);
    input(channels, j) = sigma;
    mult(j) = sigma / net.output_divisor(sigma);
  }
  ScoreNetwork::Trace trace;
  const Eigen::MatrixXd raw = net.forward(input, 1, 1, with_grad ? &trace : nullptr);
  const Eigen::MatrixXd residual = u + raw * mult.asDiagonal();
  result.loss = residual.squaredNorm();
  if (with_grad) {
    const Eigen::MatrixXd d_raw = (2.0 * grad_scale) * (residual * mult.asDiagonal());
    net.backward(trace, d_raw, 1, 1, result.grad);
  }
  return result;
}

std::size_t chunk_size(const ScoreNetwork& net) { return net.convolutional() ? 1 : kDenseChunk; }

}  // namespace

LossAndGradient dsm_loss_and_gradient(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise,
                                      std::size_t workers) {
  check_batch(net, batch, noise);
  const std::size_t n = batch.dim(0);
  const std::size_t cs = chunk_size(net);
  const std::size_t chunks = (n + cs - 1) / cs;
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<ChunkResult> parts(chunks);
  parallel_for(chunks, workers, [&](std::size_t i) {
    parts[i] = chunk_loss(net, batch, noise, i * cs, std::min(n, (i + 1) * cs), true, scale);
  });
  LossAndGradient out;
  out.grad = net.zero_gradients();
  for (const auto& p : parts) {
    out.loss += p.loss;
    out.grad.add(p.grad);
  }
  out.loss *= scale;
  return out;
}

double dsm_loss(const ScoreNetwork& net, const Tensor& batch, const NoiseDraw& noise) {
  check_batch(net, batch, noise);
  const std::size_t n = batch.dim(0);
  const std::size_t cs = chunk_size(net);
  double total = 0.0;
  for (std::size_t first = 0; first < n; first += cs) {
    total += chunk_loss(net, batch, noise, first, std::min(n, first + cs), false, 1.0).loss;
  }
  return total / static_cast<double>(n);
}

LossAndGradient dsm_loss_and_gradient(const ScoreNetwork& net, const Tensor& batch, RngStream& rng,
                                      double noise_scale) {
  if (!(noise_scale > 0.0)) throw ParameterError("DSM noise scale must be positive");
  const NoiseDraw noise = draw_dsm_noise(rng, batch.shape(), noise_scale);
  return dsm_loss_and_gradient(net, batch, noise);
}

double backprop_check(ScoreNetwork net, const Tensor& batch, const NoiseDraw& noise, double h, std::size_t stride) {
  const std::vector<double> analytic = dsm_loss_and_gradient(net, batch, noise).grad.flatten();
  stride = std::max<std::size_t>(stride, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); i += stride) {
    double& p = net.parameter(i);
    const double saved = p;
    p = saved + h;
    const double plus = dsm_loss(net, batch, noise);
    p = saved - h;
    const double minus = dsm_loss(net, batch, noise);
    p = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

TrainResult train(ScoreNetwork net, const Tensor& dataset, const TrainConfig& cfg, std::optional<TrainState> resume,
                  const StepCallback& on_step) {
  cfg.validate();
  if (dataset.rank() < 2 || dataset.empty()) throw ShapeError("training dataset must be N x signal and nonempty");
  net.options().output_scaling = cfg.output_scaling;
  net.options().sigma_floor = cfg.sigma_floor;
  net.options().data_scale = cfg.data_scale;

  TrainResult result;
  result.state = resume ? *resume : TrainState{0, RngStream(cfg.seed, 0)};
  if (cfg.steps == 0) {
    result.net = std::move(net);
    return result;
  }

  const std::size_t n = dataset.dim(0);
  const std::size_t per = dataset.size() / n;
  Shape batch_shape = dataset.shape();
  batch_shape[0] = cfg.batch_size;

  auto adam_m = net.zero_gradients();
  auto adam_v = net.zero_gradients();
  RngStream& rng = result.state.rng;
  const int sn_iters = static_cast<int>(cfg.spectral_iters);

  for (std::size_t k = 0; k < cfg.steps; ++k) {
    Tensor batch(batch_shape);
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto idx = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      std::copy_n(dataset.data().begin() + static_cast<std::ptrdiff_t>(idx * per), per,
                  batch.data().begin() + static_cast<std::ptrdiff_t>(b * per));
    }
    const NoiseDraw noise = draw_dsm_noise(rng, batch_shape, cfg.noise_scale);
    const LossAndGradient lg = dsm_loss_and_gradient(net, batch, noise, cfg.workers);
    const std::uint64_t step = result.state.step + 1;
    if (!std::isfinite(lg.loss)) {
      throw NumericalError("DSM loss became non-finite at step " + std::to_string(step));
    }

    const double t = static_cast<double>(k + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    const double progress = std::min(1.0, static_cast<double>(step - 1) / static_cast<double>(cfg.steps));
    const double lr = cfg.learning_rate * (cfg.lr_final_fraction + (1.0 - cfg.lr_final_fraction) * 0.5 *
                                                                       (1.0 + std::cos(std::numbers::pi * progress)));
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_epsilon);
      };
      update(layers[l].weight, adam_m.weight[l], adam_v.weight[l], lg.grad.weight[l]);
      update(layers[l].bias, adam_m.bias[l], adam_v.bias[l], lg.grad.bias[l]);
      spectral_normalize(layers[l].weight, cfg.spectral_target, sn_iters, layers[l].power_u);
    }

    result.state.step = step;
    result.losses.push_back(lg.loss);
    if (on_step) on_step(step, lg.loss);
  }
  // Tighten the projection once the warm-started estimates have settled.
  spectral_normalize_network(net, cfg.spectral_target, 50);
  result.net = std::move(net);
  return result;
}

}  // namespace scoreinv
