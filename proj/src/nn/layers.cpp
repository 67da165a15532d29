#include "qvc/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "qvc/errors.hpp"
#include "qvc/simd/kernels.hpp"

namespace qvc::nn {
namespace {

void check_bias(std::span<const float> bias, std::size_t out_channels) {
  if (!bias.empty() && bias.size() != out_channels) {
    throw ShapeError("bias length " + std::to_string(bias.size()) + " does not match " +
                     std::to_string(out_channels) + " output channels");
  }
}

void fill_bias(Tensor3& out, std::span<const float> bias) {
  if (bias.empty()) return;
  for (std::size_t b = 0; b < out.batch; ++b) {
    for (std::size_t c = 0; c < out.channels; ++c) std::ranges::fill(out.row(b, c), bias[c]);
  }
}

float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

}  // namespace

std::size_t conv1d_out_time(std::size_t time, std::size_t kernel, const Conv1dOptions& opt) {
  if (kernel == 0 || opt.stride == 0 || opt.dilation == 0) throw ShapeError("conv1d: kernel, stride and dilation must be >= 1");
  const std::size_t span = opt.dilation * (kernel - 1) + 1;
  const std::size_t padded = time + 2 * opt.padding;
  if (padded < span) {
    throw ShapeError("conv1d: input of length " + std::to_string(time) + " is shorter than the receptive field");
  }
  return (padded - span) / opt.stride + 1;
}

Tensor3 conv1d(const Tensor3& x, const Tensor& weight, std::span<const float> bias, const Conv1dOptions& opt) {
  if (weight.rank() != 3) throw ShapeError("conv1d: weight must be (out, in, k), got " + shape_string(weight.shape));
  const std::size_t out_ch = weight.dim(0);
  const std::size_t in_ch = weight.dim(1);
  const std::size_t k = weight.dim(2);
  if (x.channels != in_ch) {
    throw ShapeError("conv1d: input has " + std::to_string(x.channels) + " channels, weight expects " +
                     std::to_string(in_ch));
  }
  check_bias(bias, out_ch);
  const std::size_t out_t = conv1d_out_time(x.time, k, opt);
  Tensor3 out(x.batch, out_ch, out_t);
  fill_bias(out, bias);

  const std::size_t padded_t = x.time + 2 * opt.padding;
  std::vector<float> padded;
  std::vector<const float*> rows(in_ch * k);
  for (std::size_t b = 0; b < x.batch; ++b) {
    const float* src = x.plane(b);
    std::size_t ld = x.time;
    if (opt.padding > 0) {
      padded.assign(in_ch * padded_t, 0.0f);
      for (std::size_t c = 0; c < in_ch; ++c) {
        std::copy_n(src + c * x.time, x.time, padded.data() + c * padded_t + opt.padding);
      }
      src = padded.data();
      ld = padded_t;
    }
    if (opt.stride == 1) {
      for (std::size_t c = 0; c < in_ch; ++c) {
        for (std::size_t j = 0; j < k; ++j) rows[c * k + j] = src + c * ld + j * opt.dilation;
      }
      simd::gemm_rows(out_ch, out_t, in_ch * k, weight.data.data(), in_ch * k, rows.data(), out.plane(b), out_t);
      continue;
    }
    for (std::size_t o = 0; o < out_ch; ++o) {
      auto dst = out.row(b, o);
      for (std::size_t c = 0; c < in_ch; ++c) {
        const float* w = weight.data.data() + (o * in_ch + c) * k;
        const float* xr = src + c * ld;
        for (std::size_t t = 0; t < out_t; ++t) {
          float acc = 0.0f;
          for (std::size_t j = 0; j < k; ++j) acc += w[j] * xr[t * opt.stride + j * opt.dilation];
          dst[t] += acc;
        }
      }
    }
  }
  return out;
}

std::size_t conv_transpose1d_out_time(std::size_t time, std::size_t kernel, const ConvTranspose1dOptions& opt) {
  if (kernel == 0 || opt.stride == 0) throw ShapeError("conv_transpose1d: kernel and stride must be >= 1");
  if (time == 0) throw ShapeError("conv_transpose1d: empty input");
  const std::size_t full = (time - 1) * opt.stride + kernel + opt.output_padding;
  if (full <= 2 * opt.padding) throw ShapeError("conv_transpose1d: padding consumes the whole output");
  return full - 2 * opt.padding;
}

// Polyphase evaluation: output phase r (index = j*stride + r) only sees taps
// k = q*stride + r, so each phase is a dense convolution of the input with a
// short kernel and maps onto one gemm call.
Tensor3 conv_transpose1d(const Tensor3& x, const Tensor& weight, std::span<const float> bias,
                         const ConvTranspose1dOptions& opt) {
  if (weight.rank() != 3) {
    throw ShapeError("conv_transpose1d: weight must be (in, out, k), got " + shape_string(weight.shape));
  }
  const std::size_t in_ch = weight.dim(0);
  const std::size_t out_ch = weight.dim(1);
  const std::size_t k = weight.dim(2);
  if (x.channels != in_ch) {
    throw ShapeError("conv_transpose1d: input has " + std::to_string(x.channels) + " channels, weight expects " +
                     std::to_string(in_ch));
  }
  check_bias(bias, out_ch);
  const std::size_t s = opt.stride;
  const std::size_t out_t = conv_transpose1d_out_time(x.time, k, opt);
  const std::size_t full_t = (x.time - 1) * s + k;

  const std::size_t q_max = (k + s - 1) / s;
  const std::size_t lead = q_max - 1;
  const std::size_t xpad_t = x.time + 2 * lead;
  const std::size_t phase_t = x.time + lead;

  Tensor3 out(x.batch, out_ch, out_t);
  fill_bias(out, bias);

  std::vector<float> xpad(in_ch * xpad_t);
  std::vector<float> packed;
  std::vector<const float*> rows;
  std::vector<float> phase(out_ch * phase_t);
  for (std::size_t b = 0; b < x.batch; ++b) {
    std::ranges::fill(xpad, 0.0f);
    for (std::size_t c = 0; c < in_ch; ++c) std::copy_n(x.plane(b) + c * x.time, x.time, xpad.data() + c * xpad_t + lead);

    for (std::size_t r = 0; r < s && r < k; ++r) {
      const std::size_t qr = (k - r + s - 1) / s;
      packed.assign(out_ch * in_ch * qr, 0.0f);
      for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t c = 0; c < in_ch; ++c) {
          for (std::size_t q = 0; q < qr; ++q) {
            packed[(o * in_ch + c) * qr + q] = weight.data[(c * out_ch + o) * k + q * s + r];
          }
        }
      }
      rows.resize(in_ch * qr);
      for (std::size_t c = 0; c < in_ch; ++c) {
        for (std::size_t q = 0; q < qr; ++q) rows[c * qr + q] = xpad.data() + c * xpad_t + lead - q;
      }
      std::ranges::fill(phase, 0.0f);
      simd::gemm_rows(out_ch, phase_t, in_ch * qr, packed.data(), in_ch * qr, rows.data(), phase.data(), phase_t);

      for (std::size_t j = 0; j < phase_t; ++j) {
        const std::size_t full_idx = j * s + r;
        if (full_idx >= full_t || full_idx < opt.padding) continue;
        const std::size_t idx = full_idx - opt.padding;
        if (idx >= out_t) continue;
        for (std::size_t o = 0; o < out_ch; ++o) out.at(b, o, idx) += phase[o * phase_t + j];
      }
    }
  }
  return out;
}

void leaky_relu_inplace(Tensor3& x, float slope) {
  for (auto& v : x.data) v = v < 0.0f ? v * slope : v;
}

ConvParams bind_conv(const ModelWeights& w, const std::string& prefix, std::initializer_list<std::int64_t> shape,
                     std::size_t bias_dim) {
  ConvParams p;
  p.weight = &w.require(prefix + ".weight", shape);
  const std::int64_t n = *(shape.begin() + static_cast<std::ptrdiff_t>(bias_dim));
  p.bias = &w.require(prefix + ".bias", {n});
  return p;
}

// ---------------------------------------------------------------------------

WnWeights bind_wn(const ModelWeights& w, const std::string& prefix, const WnConfig& cfg) {
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  const auto k = static_cast<std::int64_t>(cfg.kernel);
  WnWeights out;
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    const std::string idx = std::to_string(i);
    out.in_layers.push_back(bind_conv(w, prefix + ".in_layers." + idx, {2 * h, h, k}));
    const std::int64_t rs = i + 1 < cfg.layers ? 2 * h : h;
    out.res_skip_layers.push_back(bind_conv(w, prefix + ".res_skip_layers." + idx, {rs, h, 1}));
  }
  if (cfg.cond_channels > 0) {
    out.cond = bind_conv(w, prefix + ".cond_layer",
                         {2 * h * static_cast<std::int64_t>(cfg.layers), static_cast<std::int64_t>(cfg.cond_channels), 1});
  }
  return out;
}

void wn_manifest(Manifest& out, const std::string& prefix, const WnConfig& cfg) {
  const auto h = static_cast<std::int64_t>(cfg.hidden);
  const auto k = static_cast<std::int64_t>(cfg.kernel);
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    const std::string idx = std::to_string(i);
    out.push_back({prefix + ".in_layers." + idx + ".weight", {2 * h, h, k}});
    out.push_back({prefix + ".in_layers." + idx + ".bias", {2 * h}});
    const std::int64_t rs = i + 1 < cfg.layers ? 2 * h : h;
    out.push_back({prefix + ".res_skip_layers." + idx + ".weight", {rs, h, 1}});
    out.push_back({prefix + ".res_skip_layers." + idx + ".bias", {rs}});
  }
  if (cfg.cond_channels > 0) {
    const std::int64_t n = 2 * h * static_cast<std::int64_t>(cfg.layers);
    out.push_back({prefix + ".cond_layer.weight", {n, static_cast<std::int64_t>(cfg.cond_channels), 1}});
    out.push_back({prefix + ".cond_layer.bias", {n}});
  }
}

Tensor3 wn_stack(const Tensor3& x, std::span<const float> g, const WnWeights& w, const WnConfig& cfg) {
  const std::size_t h = cfg.hidden;
  if (x.channels != h) throw ShapeError("wn_stack: input channels do not match hidden width");
  if (w.in_layers.size() != cfg.layers || w.res_skip_layers.size() != cfg.layers) {
    throw ConfigError("wn_stack: weight bundle does not match layer count");
  }

  std::vector<float> cond;
  if (!g.empty()) {
    if (w.cond.weight == nullptr) throw ConfigError("wn_stack: conditioning vector given but no cond_layer weights");
    const Tensor& cw = *w.cond.weight;
    if (cw.dim(1) != g.size()) throw ShapeError("wn_stack: conditioning vector length does not match cond_layer");
    const std::size_t n = cw.dim(0);
    cond.resize(n);
    const auto cb = w.cond.bias_span();
    for (std::size_t o = 0; o < n; ++o) {
      cond[o] = simd::dot({cw.data.data() + o * g.size(), g.size()}, g) + (cb.empty() ? 0.0f : cb[o]);
    }
  }

  Tensor3 cur = x;
  Tensor3 output(x.batch, h, x.time);
  Tensor3 acts(x.batch, h, x.time);
  std::size_t dilation = 1;
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    const Conv1dOptions opt{1, dilation, (cfg.kernel * dilation - dilation) / 2};
    Tensor3 x_in = conv1d(cur, *w.in_layers[i].weight, w.in_layers[i].bias_span(), opt);
    if (x_in.time != x.time) throw ShapeError("wn_stack: kernel must be odd to preserve length");
    for (std::size_t b = 0; b < x.batch; ++b) {
      for (std::size_t c = 0; c < h; ++c) {
        const float ca = cond.empty() ? 0.0f : cond[i * 2 * h + c];
        const float cb = cond.empty() ? 0.0f : cond[i * 2 * h + h + c];
        const auto a = x_in.row(b, c);
        const auto s = x_in.row(b, h + c);
        auto dst = acts.row(b, c);
        for (std::size_t t = 0; t < x.time; ++t) dst[t] = std::tanh(a[t] + ca) * sigmoid(s[t] + cb);
      }
    }
    Tensor3 rs = conv1d(acts, *w.res_skip_layers[i].weight, w.res_skip_layers[i].bias_span());
    if (i + 1 < cfg.layers) {
      for (std::size_t b = 0; b < x.batch; ++b) {
        simd::axpy(1.0f, {rs.plane(b), h * x.time}, {cur.plane(b), h * x.time});
        simd::axpy(1.0f, {rs.plane(b) + h * x.time, h * x.time}, {output.plane(b), h * x.time});
      }
    } else {
      simd::axpy(1.0f, rs.data, output.data);
    }
    dilation *= cfg.dilation_rate;
  }
  return output;
}

// ---------------------------------------------------------------------------

ResBlockWeights bind_resblock(const ModelWeights& w, const std::string& prefix, std::size_t channels,
                              std::size_t kernel, std::size_t n_dilations) {
  const auto c = static_cast<std::int64_t>(channels);
  const auto k = static_cast<std::int64_t>(kernel);
  ResBlockWeights out;
  for (std::size_t m = 0; m < n_dilations; ++m) {
    out.convs1.push_back(bind_conv(w, prefix + ".convs1." + std::to_string(m), {c, c, k}));
    out.convs2.push_back(bind_conv(w, prefix + ".convs2." + std::to_string(m), {c, c, k}));
  }
  return out;
}

void resblock_manifest(Manifest& out, const std::string& prefix, std::size_t channels, std::size_t kernel,
                       std::size_t n_dilations) {
  const auto c = static_cast<std::int64_t>(channels);
  const auto k = static_cast<std::int64_t>(kernel);
  for (std::size_t m = 0; m < n_dilations; ++m) {
    for (const char* which : {".convs1.", ".convs2."}) {
      out.push_back({prefix + which + std::to_string(m) + ".weight", {c, c, k}});
      out.push_back({prefix + which + std::to_string(m) + ".bias", {c}});
    }
  }
}

Tensor3 resblock(const Tensor3& x, const ResBlockWeights& w, std::size_t kernel, std::span<const std::size_t> dilations) {
  if (kernel % 2 == 0) throw ShapeError("resblock: kernel must be odd");
  if (w.convs1.size() != dilations.size() || w.convs2.size() != dilations.size()) {
    throw ShapeError("resblock: weight bundle does not match dilation count");
  }
  Tensor3 cur = x;
  for (std::size_t m = 0; m < dilations.size(); ++m) {
    const std::size_t d = dilations[m];
    Tensor3 xt = cur;
    leaky_relu_inplace(xt, kResBlockSlope);
    xt = conv1d(xt, *w.convs1[m].weight, w.convs1[m].bias_span(), {1, d, d * (kernel - 1) / 2});
    leaky_relu_inplace(xt, kResBlockSlope);
    xt = conv1d(xt, *w.convs2[m].weight, w.convs2[m].bias_span(), {1, 1, (kernel - 1) / 2});
    if (xt.channels != cur.channels || xt.time != cur.time) throw ShapeError("resblock: conv changed the shape");
    simd::axpy(1.0f, xt.data, cur.data);
  }
  return cur;
}

// ---------------------------------------------------------------------------

LstmWeights bind_lstm(const ModelWeights& w, const std::string& prefix, std::size_t input, std::size_t hidden) {
  const auto in = static_cast<std::int64_t>(input);
  const auto h = static_cast<std::int64_t>(hidden);
  LstmWeights out;
  out.w_ih = &w.require(prefix + ".weight_ih_l0", {4 * h, in});
  out.w_hh = &w.require(prefix + ".weight_hh_l0", {4 * h, h});
  out.b_ih = &w.require(prefix + ".bias_ih_l0", {4 * h});
  out.b_hh = &w.require(prefix + ".bias_hh_l0", {4 * h});
  return out;
}

std::vector<float> lstm_forward(const Matrix& x, const LstmWeights& w) {
  const std::size_t h = w.hidden();
  const std::size_t in = w.input();
  if (x.cols != in) {
    throw ShapeError("lstm: input frames have " + std::to_string(x.cols) + " features, weights expect " +
                     std::to_string(in));
  }
  const std::size_t steps = x.rows;
  // Input projections for all steps at once: (4H x T).
  std::vector<float> xt(in * steps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t f = 0; f < in; ++f) xt[f * steps + t] = x(t, f);
  }
  std::vector<float> proj(4 * h * steps);
  for (std::size_t g = 0; g < 4 * h; ++g) {
    std::fill_n(proj.data() + g * steps, steps, w.b_ih->data[g] + w.b_hh->data[g]);
  }
  std::vector<const float*> rows(in);
  for (std::size_t f = 0; f < in; ++f) rows[f] = xt.data() + f * steps;
  if (steps > 0) simd::gemm_rows(4 * h, steps, in, w.w_ih->data.data(), in, rows.data(), proj.data(), steps);

  std::vector<float> hs(h, 0.0f);
  std::vector<float> cs(h, 0.0f);
  std::vector<float> gates(4 * h);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t g = 0; g < 4 * h; ++g) {
      gates[g] = proj[g * steps + t] + simd::dot({w.w_hh->data.data() + g * h, h}, hs);
    }
    for (std::size_t j = 0; j < h; ++j) {
      const float ig = sigmoid(gates[j]);
      const float fg = sigmoid(gates[h + j]);
      const float cg = std::tanh(gates[2 * h + j]);
      const float og = sigmoid(gates[3 * h + j]);
      cs[j] = fg * cs[j] + ig * cg;
      hs[j] = og * std::tanh(cs[j]);
    }
  }
  return hs;
}

}  // namespace qvc::nn
