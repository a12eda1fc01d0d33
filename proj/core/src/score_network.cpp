#include "scoreinv/score_network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "scoreinv/error.hpp"

namespace scoreinv {

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void activate(Activation a, Eigen::MatrixXd& m) {
  if (a == Activation::Silu) m = m.unaryExpr([](double v) { return v * sigmoid(v); });
}

void activation_backward(Activation a, const Eigen::MatrixXd& pre, Eigen::MatrixXd& grad) {
  if (a == Activation::Silu) {
    grad.array() *= pre.unaryExpr([](double v) {
      const double s = sigmoid(v);
      return s + v * s * (1.0 - s);
    }).array();
  }
}

Layer make_layer(Eigen::Index in, Eigen::Index out, int kernel, Activation act, bool residual, RngStream& rng) {
  Layer layer;
  const Eigen::Index fan_in = in * (kernel ? kernel * kernel : 1);
  layer.weight.resize(out, fan_in);
  const double sd = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = sd * rng.gaussian();
  }
  layer.bias = Eigen::VectorXd::Zero(out);
  layer.kernel = kernel;
  layer.activation = act;
  layer.residual = residual;
  return layer;
}

}  // namespace

std::uint8_t Layer::tag() const {
  const unsigned kcode = kernel ? static_cast<unsigned>(kernel - 1) / 2 : 0u;
  const unsigned dcode = static_cast<unsigned>(std::countr_zero(static_cast<unsigned>(dilation)));
  return static_cast<std::uint8_t>(static_cast<unsigned>(activation) | (residual ? 0x4u : 0u) | (kcode << 4) |
                                   (dcode << 6));
}

void Layer::apply_tag(Layer& layer, std::uint8_t tag) {
  const unsigned act = tag & 0x3u;
  if (act > 1) throw IoError("unknown activation tag " + std::to_string(act));
  layer.activation = static_cast<Activation>(act);
  layer.residual = (tag & 0x4u) != 0;
  if (tag & 0x8u) throw IoError("reserved bit set in layer tag");
  const unsigned kcode = (tag >> 4) & 0x3u;
  layer.kernel = kcode ? static_cast<int>(2 * kcode + 1) : 0;
  layer.dilation = 1 << (tag >> 6);
  if (!layer.kernel && layer.dilation != 1) throw IoError("dilation on a dense layer tag");
}

void NetworkGradients::add(const NetworkGradients& other) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
}

void NetworkGradients::scale(double s) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] *= s;
    bias[l] *= s;
  }
}

std::vector<double> NetworkGradients::flatten() const {
  std::vector<double> out;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    out.insert(out.end(), weight[l].data(), weight[l].data() + weight[l].size());
    out.insert(out.end(), bias[l].data(), bias[l].data() + bias[l].size());
  }
  return out;
}

ScoreNetwork::ScoreNetwork(std::vector<Layer> layers, NetworkOptions options)
    : layers_(std::move(layers)), options_(options) {
  if (layers_.empty()) throw ParameterError("score network needs at least one layer");
  if (!(options_.sigma_floor > 0.0)) throw ParameterError("sigma_floor must be positive");
  if (!(options_.data_scale > 0.0)) throw ParameterError("data_scale must be positive");
  const int kernel = layers_.front().kernel;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.kernel != kernel) throw ParameterError("cannot mix dense and convolutional layers");
    if (layer.bias.size() != layer.weight.rows()) throw ShapeError("layer bias length mismatch");
    if (layer.kernel && (layer.kernel < 3 || layer.kernel > 7 || layer.kernel % 2 == 0)) {
      throw ParameterError("convolution kernel must be 3, 5 or 7");
    }
    if (!std::has_single_bit(static_cast<unsigned>(layer.dilation)) || layer.dilation > 8 ||
        (!layer.kernel && layer.dilation != 1)) {
      throw ParameterError("dilation must be 1, 2, 4 or 8 and only on convolutions");
    }
    if (layer.kernel && layer.weight.cols() % (layer.kernel * layer.kernel) != 0) {
      throw ShapeError("convolution weight columns not divisible by kernel area");
    }
    if (l > 0 && layer.in_features() != layers_[l - 1].out_features()) {
      throw ShapeError("layer " + std::to_string(l) + " input width does not match previous output");
    }
    if (layer.residual && layer.in_features() != layer.out_features()) {
      throw ShapeError("residual layer must be square");
    }
  }
  if (layers_.front().in_features() != layers_.back().out_features() + 1) {
    throw ShapeError("network input must be signal width + 1 noise channel");
  }
}

std::size_t ScoreNetwork::dim() const { return static_cast<std::size_t>(layers_.back().out_features()); }

double ScoreNetwork::output_divisor(double sigma) const {
  return options_.output_scaling ? std::max(std::abs(sigma), options_.sigma_floor) : 1.0;
}

Eigen::MatrixXd ScoreNetwork::make_input(const Tensor& x, double sigma, int& height, int& width) const {
  const auto channels = static_cast<Eigen::Index>(dim());
  if (convolutional()) {
    if (x.rank() != 3 || x.dim(2) != static_cast<std::size_t>(channels)) {
      throw ShapeError("convolutional score network expects H x W x " + std::to_string(channels) + ", got " +
                       shape_string(x.shape()));
    }
    height = static_cast<int>(x.dim(0));
    width = static_cast<int>(x.dim(1));
  } else {
    if (x.size() != static_cast<std::size_t>(channels)) {
      throw ShapeError("dense score network expects " + std::to_string(channels) + " values, got " +
                       shape_string(x.shape()));
    }
    height = 1;
    width = 1;
  }
  const Eigen::Index positions = Eigen::Index{height} * width;
  Eigen::MatrixXd input(channels + 1, positions);
  input.topRows(channels) = Eigen::Map<const Eigen::MatrixXd>(x.data().data(), channels, positions);
  input.row(channels).setConstant(sigma);
  return input;
}

Eigen::MatrixXd im2col(const Eigen::MatrixXd& input, int height, int width, int kernel, int dilation) {
  const Eigen::Index channels = input.rows();
  const int half = kernel / 2;
  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(channels * kernel * kernel, Eigen::Index{height} * width);
  for (int dy = 0; dy < kernel; ++dy) {
    for (int dx = 0; dx < kernel; ++dx) {
      const Eigen::Index row0 = dy * kernel + dx;
      for (int r = 0; r < height; ++r) {
        const int sr = r + (dy - half) * dilation;
        if (sr < 0 || sr >= height) continue;
        for (int c = 0; c < width; ++c) {
          const int sc = c + (dx - half) * dilation;
          if (sc < 0 || sc >= width) continue;
          const Eigen::Index dst = Eigen::Index{r} * width + c;
          const Eigen::Index src = Eigen::Index{sr} * width + sc;
          for (Eigen::Index ch = 0; ch < channels; ++ch) cols(ch * kernel * kernel + row0, dst) = input(ch, src);
        }
      }
    }
  }
  return cols;
}

Eigen::MatrixXd col2im(const Eigen::MatrixXd& cols, int channels, int height, int width, int kernel,
                       int dilation) {
  const int half = kernel / 2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(channels, Eigen::Index{height} * width);
  for (int dy = 0; dy < kernel; ++dy) {
    for (int dx = 0; dx < kernel; ++dx) {
      const Eigen::Index row0 = dy * kernel + dx;
      for (int r = 0; r < height; ++r) {
        const int sr = r + (dy - half) * dilation;
        if (sr < 0 || sr >= height) continue;
        for (int c = 0; c < width; ++c) {
          const int sc = c + (dx - half) * dilation;
          if (sc < 0 || sc >= width) continue;
          const Eigen::Index dst = Eigen::Index{r} * width + c;
          const Eigen::Index src = Eigen::Index{sr} * width + sc;
          for (Eigen::Index ch = 0; ch < channels; ++ch) out(ch, src) += cols(ch * kernel * kernel + row0, dst);
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd ScoreNetwork::forward(const Eigen::MatrixXd& input, int height, int width, Trace* trace) const {
  if (trace) {
    trace->inputs.resize(layers_.size());
    trace->cols.resize(layers_.size());
    trace->pre.resize(layers_.size());
  }
  Eigen::MatrixXd current = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Eigen::MatrixXd pre;
    if (layer.kernel) {
      Eigen::MatrixXd cols = im2col(current, height, width, layer.kernel, layer.dilation);
      pre.noalias() = layer.weight * cols;
      if (trace) trace->cols[l] = std::move(cols);
    } else {
      pre.noalias() = layer.weight * current;
    }
    pre.colwise() += layer.bias;
    Eigen::MatrixXd out = pre;
    activate(layer.activation, out);
    if (layer.residual) out += current;
    if (trace) {
      trace->inputs[l] = std::move(current);
      trace->pre[l] = std::move(pre);
    }
    current = std::move(out);
  }
  return current;
}

void ScoreNetwork::backward(const Trace& trace, const Eigen::MatrixXd& d_output, int height, int width,
                            NetworkGradients& grads) const {
  Eigen::MatrixXd d = d_output;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    Eigen::MatrixXd d_pre = d;
    activation_backward(layer.activation, trace.pre[li], d_pre);
    const Eigen::MatrixXd& layer_in = layer.kernel ? trace.cols[li] : trace.inputs[li];
    grads.weight[li].noalias() += d_pre * layer_in.transpose();
    grads.bias[li] += d_pre.rowwise().sum();
    if (li == 0) break;
    Eigen::MatrixXd d_in;
    if (layer.kernel) {
      Eigen::MatrixXd d_cols = layer.weight.transpose() * d_pre;
      d_in = col2im(d_cols, static_cast<int>(layer.in_features()), height, width, layer.kernel,
                    layer.dilation);
    } else {
      d_in.noalias() = layer.weight.transpose() * d_pre;
    }
    if (layer.residual) d_in += d;
    d = std::move(d_in);
  }
}

Tensor ScoreNetwork::score(const Tensor& x, double sigma) const {
  const double c = options_.data_scale;
  const Tensor xn = x / c;
  const double sn = sigma / c;
  int height = 0;
  int width = 0;
  const Eigen::MatrixXd input = make_input(xn, sn, height, width);
  const Eigen::MatrixXd out = forward(input, height, width, nullptr);
  Tensor result(x.shape());
  const double factor = 1.0 / (output_divisor(sn) * c);
  Eigen::Map<Eigen::MatrixXd>(result.data().data(), out.rows(), out.cols()) = out * factor;
  return result;
}

NetworkGradients ScoreNetwork::zero_gradients() const {
  NetworkGradients g;
  for (const auto& layer : layers_) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

std::size_t ScoreNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

double& ScoreNetwork::parameter(std::size_t index) {
  for (auto& layer : layers_) {
    const auto nw = static_cast<std::size_t>(layer.weight.size());
    if (index < nw) return layer.weight.data()[index];
    index -= nw;
    const auto nb = static_cast<std::size_t>(layer.bias.size());
    if (index < nb) return layer.bias.data()[index];
    index -= nb;
  }
  throw ParameterError("parameter index out of range");
}

ScoreNetwork make_mlp_network(std::size_t dim, std::size_t width, std::size_t hidden, RngStream& rng,
                              NetworkOptions options) {
  if (dim == 0 || width == 0 || hidden == 0) throw ParameterError("MLP sizes must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  const auto w = static_cast<Eigen::Index>(width);
  std::vector<Layer> layers;
  layers.push_back(make_layer(d + 1, w, 0, Activation::Silu, false, rng));
  for (std::size_t i = 1; i < hidden; ++i) layers.push_back(make_layer(w, w, 0, Activation::Silu, true, rng));
  layers.push_back(make_layer(w, d, 0, Activation::Identity, false, rng));
  return ScoreNetwork(std::move(layers), options);
}

ScoreNetwork make_conv_network(std::size_t channels, std::size_t width, std::size_t layers, RngStream& rng,
                               NetworkOptions options, int kernel, const std::vector<int>& dilations) {
  if (channels == 0 || width == 0) throw ParameterError("conv net sizes must be positive");
  if (layers < 2) throw ParameterError("conv net needs at least 2 layers");
  const auto c = static_cast<Eigen::Index>(channels);
  const auto w = static_cast<Eigen::Index>(width);
  std::vector<Layer> out;
  out.push_back(make_layer(c + 1, w, kernel, Activation::Silu, false, rng));
  for (std::size_t i = 2; i < layers; ++i) out.push_back(make_layer(w, w, kernel, Activation::Silu, true, rng));
  out.push_back(make_layer(w, c, kernel, Activation::Identity, false, rng));
  if (!dilations.empty()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i].dilation = dilations[i % dilations.size()];
  }
  return ScoreNetwork(std::move(out), options);
}

}  // namespace scoreinv
