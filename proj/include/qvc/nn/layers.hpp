#pragma once

// Inference-only layer primitives. Convolutions use the cross-correlation
// convention and PyTorch weight layouts: conv1d weights are (out, in, k),
// conv_transpose1d weights are (in, out, k).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qvc/nn/tensor.hpp"
#include "qvc/nn/weights.hpp"
#include "qvc/types.hpp"

namespace qvc::nn {

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;
};

std::size_t conv1d_out_time(std::size_t time, std::size_t kernel, const Conv1dOptions& opt);

Tensor3 conv1d(const Tensor3& x, const Tensor& weight, std::span<const float> bias, const Conv1dOptions& opt = {});

struct ConvTranspose1dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t output_padding = 0;
};

std::size_t conv_transpose1d_out_time(std::size_t time, std::size_t kernel, const ConvTranspose1dOptions& opt);

Tensor3 conv_transpose1d(const Tensor3& x, const Tensor& weight, std::span<const float> bias,
                         const ConvTranspose1dOptions& opt = {});

void leaky_relu_inplace(Tensor3& x, float slope);

/// A convolution bound to tensors inside a ModelWeights.
struct ConvParams {
  const Tensor* weight = nullptr;
  const Tensor* bias = nullptr;

  std::span<const float> bias_span() const {
    return bias ? std::span<const float>(bias->data) : std::span<const float>{};
  }
};

// Binds `<prefix>.weight` with the given shape and `<prefix>.bias` of
// length shape[bias_dim].
ConvParams bind_conv(const ModelWeights& w, const std::string& prefix, std::initializer_list<std::int64_t> shape,
                     std::size_t bias_dim = 0);

// ---------------------------------------------------------------------------
// Gated dilated convolution stack with optional global conditioning.

struct WnConfig {
  std::size_t hidden = 192;
  std::size_t kernel = 5;
  std::size_t dilation_rate = 1;
  std::size_t layers = 16;
  std::size_t cond_channels = 0;  // 0 = unconditioned
};

struct WnWeights {
  std::vector<ConvParams> in_layers;        // (2H, H, k)
  std::vector<ConvParams> res_skip_layers;  // (2H, H, 1), last layer (H, H, 1)
  ConvParams cond;                          // (2H * layers, cond, 1) or unbound
};

// Tensor names under `<prefix>.`:
//   in_layers.{i}.weight/bias, res_skip_layers.{i}.weight/bias,
//   cond_layer.weight/bias (only when cfg.cond_channels > 0).
WnWeights bind_wn(const ModelWeights& w, const std::string& prefix, const WnConfig& cfg);
void wn_manifest(Manifest& out, const std::string& prefix,
                 const WnConfig& cfg);

// Returns the summed skip outputs, (batch, hidden, time). `g` is the
// conditioning vector (empty for none).
Tensor3 wn_stack(const Tensor3& x, std::span<const float> g, const WnWeights& w, const WnConfig& cfg);

// ---------------------------------------------------------------------------
// Residual block: for each dilation d,
//   x += conv2(lrelu(conv1_d(lrelu(x))))   with slope 0.1.

struct ResBlockWeights {
  std::vector<ConvParams> convs1;
  std::vector<ConvParams> convs2;
};

inline constexpr float kResBlockSlope = 0.1f;

ResBlockWeights bind_resblock(const ModelWeights& w, const std::string& prefix, std::size_t channels,
                              std::size_t kernel, std::size_t n_dilations);
void resblock_manifest(Manifest& out,
                       const std::string& prefix, std::size_t channels, std::size_t kernel, std::size_t n_dilations);

Tensor3 resblock(const Tensor3& x, const ResBlockWeights& w, std::size_t kernel, std::span<const std::size_t> dilations);

// ---------------------------------------------------------------------------
// Single-layer LSTM, PyTorch gate order (input, forget, cell, output).

struct LstmWeights {
  const Tensor* w_ih = nullptr;  // (4H, in)
  const Tensor* w_hh = nullptr;  // (4H, H)
  const Tensor* b_ih = nullptr;  // (4H)
  const Tensor* b_hh = nullptr;  // (4H)

  std::size_t hidden() const { return w_hh->dim(1); }
  std::size_t input() const { return w_ih->dim(1); }
};

LstmWeights bind_lstm(const ModelWeights& w, const std::string& prefix, std::size_t input, std::size_t hidden);

// x is frame-major (T x in). Returns the hidden state after the last frame.
std::vector<float> lstm_forward(const Matrix& x, const LstmWeights& w);

}  // namespace qvc::nn
