#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "scoreinv/rng.hpp"
#include "scoreinv/score_models.hpp"

namespace scoreinv {

enum class Activation : std::uint8_t { Identity = 0, Silu = 1 };

/// One affine map followed by a nonlinearity. Dense layers act on feature
/// columns; convolutional layers (kernel 3, 5 or 7) use a k x k "same"
/// zero-padded stencil with taps `dilation` pixels apart and store the
/// weight as out x (in * k * k).
struct Layer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation activation = Activation::Identity;
  bool residual = false;  // output += input; requires in == out
  int kernel = 0;
  int dilation = 1;  // 1, 2, 4 or 8

  // Left singular vector estimate kept between spectral-norm projections.
  Eigen::VectorXd power_u;

  Eigen::Index in_features() const { return kernel ? weight.cols() / (kernel * kernel) : weight.cols(); }
  Eigen::Index out_features() const { return weight.rows(); }

  /// Packed layer descriptor: bits 0-1 activation, bit 2 residual,
  /// bits 4-5 (kernel - 1) / 2 with 0 meaning dense, bits 6-7 log2(dilation).
  std::uint8_t tag() const;
  static void apply_tag(Layer& layer, std::uint8_t tag);
};

struct NetworkGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  void add(const NetworkGradients& other);
  void scale(double s);
  std::vector<double> flatten() const;
};

struct NetworkOptions {
  bool output_scaling = true;
  double sigma_floor = 1e-3;
  double data_scale = 1.0;
};

/// Noise-conditional score network r_theta(x, sigma).
///
/// The input is the signal with a constant sigma channel appended. With
/// output scaling on, the raw network output is divided by
/// max(|sigma|, sigma_floor). Inputs are divided by `data_scale` before the
/// network sees them and scores are mapped back to data units.
class ScoreNetwork final : public ScoreModel {
 public:
  /// Per-layer activations kept by forward() for backward().
  struct Trace {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> cols;
    std::vector<Eigen::MatrixXd> pre;
  };

  ScoreNetwork() = default;
  ScoreNetwork(std::vector<Layer> layers, NetworkOptions options);

  Tensor score(const Tensor& x, double sigma) const override;
  std::size_t dim() const override;

  bool convolutional() const { return !layers_.empty() && layers_.front().kernel > 0; }

  /// Raw network on one example in network units, laid out as
  /// features x positions (positions = 1 for dense nets, H*W for conv nets).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, int height, int width, Trace* trace) const;

  /// Accumulates parameter gradients of <d_output, forward(input)> into grads.
  void backward(const Trace& trace, const Eigen::MatrixXd& d_output, int height, int width,
                NetworkGradients& grads) const;

  /// Builds the features x positions input for signal x (network units) at noise sigma.
  Eigen::MatrixXd make_input(const Tensor& x, double sigma, int& height, int& width) const;

  /// Divisor applied to the raw output at noise sigma (network units).
  double output_divisor(double sigma) const;

  NetworkGradients zero_gradients() const;

  std::size_t parameter_count() const;
  /// Parameters enumerated layer by layer: weight (column-major) then bias.
  double& parameter(std::size_t index);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const NetworkOptions& options() const { return options_; }
  NetworkOptions& options() { return options_; }

 private:
  std::vector<Layer> layers_;
  NetworkOptions options_;
};

/// Residual MLP: (dim+1) -> width, (hidden-1) residual width -> width blocks,
/// then width -> dim. All hidden layers use SiLU.
ScoreNetwork make_mlp_network(std::size_t dim, std::size_t width, std::size_t hidden, RngStream& rng,
                              NetworkOptions options = {});

/// Convolutional residual net on H x W x channels images with a sigma map as
/// the extra input channel: conv(channels+1 -> width), residual
/// conv(width -> width) blocks, conv(width -> channels). `layers` >= 2.
/// Layer i uses dilations[i % dilations.size()] (all 1 when empty).
ScoreNetwork make_conv_network(std::size_t channels, std::size_t width, std::size_t layers, RngStream& rng,
                               NetworkOptions options = {}, int kernel = 3, const std::vector<int>& dilations = {});

/// k x k "same" patch extraction: (C x H*W) -> (C*k*k x H*W), and its adjoint.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& input, int height, int width, int kernel, int dilation = 1);
Eigen::MatrixXd col2im(const Eigen::MatrixXd& cols, int channels, int height, int width, int kernel,
                       int dilation = 1);

}  // namespace scoreinv
