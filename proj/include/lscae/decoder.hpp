#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lscae/matrix.hpp"
#include "lscae/rng.hpp"

namespace lscae {

struct Activation {
  enum class Kind { LeakyRelu, Identity };

  Kind kind = Kind::Identity;
  double slope = 0.01;

  static Activation leaky_relu(double slope = 0.01) { return {Kind::LeakyRelu, slope}; }
  static Activation identity() { return {Kind::Identity, 0.0}; }

  double apply(double z) const { return kind == Kind::LeakyRelu && !(z > 0.0) ? slope * z : z; }
  /// Derivative; at z = 0 LeakyReLU uses the slope.
  double derivative(double z) const {
    return kind == Kind::LeakyRelu && !(z > 0.0) ? slope : 1.0;
  }
};

struct DenseLayer {
  Matrix w;               // out x in
  std::vector<double> b;  // out
  Activation activation;

  std::size_t in() const noexcept { return w.cols(); }
  std::size_t out() const noexcept { return w.rows(); }
};

/// Stack of dense layers: k -> hidden... -> d, last layer linear.
struct MlpDecoder {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().in(); }
  std::size_t output_dim() const { return layers.back().out(); }

  /// Fan-based uniform init, a = sqrt(6 / (in + out)); zero biases.
  static MlpDecoder initialize(std::size_t k, std::size_t d, RngStream& stream,
                               const std::vector<std::size_t>& hidden = {128, 128},
                               double slope = 0.01);
  void validate() const;
};

struct DecoderCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

struct DecoderOutput {
  Matrix xhat;
  DecoderCache cache;
};

DecoderOutput decoder_forward(const MlpDecoder& dec, const Matrix& c);

struct DecoderGradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
  Matrix dc;  // gradient with respect to the decoder input
};

DecoderGradients decoder_backward(const MlpDecoder& dec, const DecoderCache& cache,
                                  const Matrix& dxhat);

/// Bias-corrected adaptive-moment optimizer state for one parameter group.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

/// One update of every parameter block; moments are created on first use.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state, double lr);

/// Parameter views in checkpoint order: W0, b0, W1, b1, ...
std::vector<std::span<double>> parameter_views(MlpDecoder& dec);
std::vector<std::span<const double>> gradient_views(const DecoderGradients& g);

/// Checkpoint: 8-byte magic "LSCAEDEC", u64 little-endian header length, a
/// JSON header with layer shapes and activations, then every parameter as
/// little-endian f64 in `parameter_views` order.
void save_decoder(const MlpDecoder& dec, const std::filesystem::path& path);
MlpDecoder load_decoder(const std::filesystem::path& path);

}  // namespace lscae
